#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflictlens/conflict.hpp"
#include "conflictlens/evaluate.hpp"
#include "conflictlens/habits.hpp"
#include "conflictlens/preprocess.hpp"

namespace conflictlens {

inline constexpr const char* kSchemaVersion = "1";

/// Persistent unit of the mining stage: all habits of a home plus the bin
/// schemes their numeric attributes were discretized with.
struct HabitDatabase {
    std::vector<ServiceUsageHabit> habits;
    std::vector<BinScheme> bin_schemes;
};

namespace detail {

using Json = nlohmann::ordered_json;

inline Json parse_json(const std::string& text, const char* what) {
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw std::runtime_error(std::string(what) + ": not valid JSON");
    return doc;
}

inline void check_schema(const Json& doc, const char* what) {
    const std::string found =
        doc.contains("schema_version") ? doc["schema_version"].get<std::string>() : "(none)";
    if (found != kSchemaVersion)
        throw std::runtime_error(std::string(what) + ": schema_version mismatch, expected \"" +
                                 kSchemaVersion + "\", found \"" + found + "\"");
}

inline std::string fixed6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string opt6(const std::optional<double>& v) { return v ? fixed6(*v) : "NA"; }

inline std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += sep;
        out += p;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Habit database
// ---------------------------------------------------------------------------

inline std::string save_habits(const HabitDatabase& db) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["habits"] = detail::Json::array();
    for (const auto& h : db.habits) {
        detail::Json jh;
        jh["user"] = h.user_id;
        jh["location"] = h.location;
        jh["window_start_min"] = h.window_start;
        jh["start_tolerance_min"] = h.start_tolerance;
        jh["window_end_min"] = h.window_end;
        jh["end_tolerance_min"] = h.end_tolerance;
        jh["support"] = h.support;
        jh["fsas"] = detail::Json::array();
        for (const auto& fsa : h.fsas) {
            detail::Json jf;
            jf["id"] = fsa.fsa_id;
            jf["attribute"] = fsa.name;
            jf["service"] = fsa.service_id;
            jf["values"] = detail::Json::object();
            for (const auto& [label, score] : fsa.values) jf["values"][label] = score;
            jh["fsas"].push_back(std::move(jf));
        }
        doc["habits"].push_back(std::move(jh));
    }
    doc["bin_schemes"] = detail::Json::array();
    for (const auto& s : db.bin_schemes) {
        detail::Json js;
        js["attribute"] = s.attribute;
        js["edges"] = s.edges;
        js["labels"] = s.labels;
        doc["bin_schemes"].push_back(std::move(js));
    }
    return doc.dump(2) + "\n";
}

/// Loads and validates a habit database; invariant violations (bad score
/// sums, inverted windows) and schema mismatches are errors.
inline HabitDatabase load_habits(const std::string& text) {
    const detail::Json doc = detail::parse_json(text, "habit db");
    detail::check_schema(doc, "habit db");
    HabitDatabase db;
    for (const auto& jh : doc.value("habits", detail::Json::array())) {
        ServiceUsageHabit h;
        h.user_id = jh.at("user").get<std::string>();
        h.location = jh.at("location").get<std::string>();
        h.window_start = jh.at("window_start_min").get<double>();
        h.start_tolerance = jh.at("start_tolerance_min").get<double>();
        h.window_end = jh.at("window_end_min").get<double>();
        h.end_tolerance = jh.at("end_tolerance_min").get<double>();
        h.support = jh.at("support").get<std::size_t>();
        for (const auto& jf : jh.at("fsas")) {
            FuzzyServiceAttribute fsa;
            fsa.fsa_id = jf.at("id").get<std::string>();
            fsa.name = jf.at("attribute").get<std::string>();
            fsa.service_id = jf.at("service").get<std::string>();
            for (const auto& [label, score] : jf.at("values").items())
                fsa.values[label] = score.get<double>();
            h.fsas.push_back(std::move(fsa));
        }
        validate(h);
        db.habits.push_back(std::move(h));
    }
    for (const auto& js : doc.value("bin_schemes", detail::Json::array())) {
        BinScheme s;
        s.attribute = js.at("attribute").get<std::string>();
        s.edges = js.at("edges").get<std::vector<double>>();
        s.labels = js.at("labels").get<std::vector<std::string>>();
        if (s.labels.size() != s.edges.size() + 1)
            throw std::runtime_error("habit db: bin scheme label/edge count mismatch");
        db.bin_schemes.push_back(std::move(s));
    }
    return db;
}

// ---------------------------------------------------------------------------
// Conflict reports
// ---------------------------------------------------------------------------

inline std::string save_reports(const std::vector<ConflictReport>& reports, double mu) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["mu"] = mu;
    doc["reports"] = detail::Json::array();
    for (const auto& r : reports) {
        detail::Json jr;
        jr["location"] = r.group.location;
        jr["attribute"] = r.group.attribute;
        jr["users"] = r.users;
        jr["class"] = to_string(r.conflict_class);
        jr["entropy"] = r.entropy;
        jr["max_entropy"] = r.max_entropy;
        jr["gain"] = r.gain;
        jr["proximity"] = r.proximity;
        jr["span_start_min"] = r.group.span_start;
        jr["span_end_min"] = r.group.span_end;
        jr["symbols"] = detail::Json::array();
        for (const auto& s : r.group.symbols) {
            detail::Json js;
            js["habit"] = s.habit_index;
            js["user"] = r.group.habits[s.habit_index].user_id;
            js["polarity"] = s.is_start ? "+" : "-";
            js["minute"] = s.minute;
            jr["symbols"].push_back(std::move(js));
        }
        doc["reports"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

inline std::vector<PredictedConflict> load_predicted(const std::string& text) {
    const detail::Json doc = detail::parse_json(text, "report file");
    detail::check_schema(doc, "report file");
    std::vector<PredictedConflict> out;
    for (const auto& jr : doc.value("reports", detail::Json::array())) {
        PredictedConflict p;
        p.location = jr.at("location").get<std::string>();
        p.attribute = jr.at("attribute").get<std::string>();
        p.users = jr.at("users").get<std::vector<std::string>>();
        p.conflict_class = conflict_class_from_string(jr.at("class").get<std::string>());
        p.gain = jr.value("gain", 0.0);
        p.proximity = jr.value("proximity", 0.0);
        out.push_back(std::move(p));
    }
    return out;
}

inline std::string reports_tsv(const std::vector<ConflictReport>& reports) {
    std::string out =
        "location\tattribute\tusers\tclass\tentropy\tmax_entropy\tgain\tproximity\t"
        "span_start_min\tspan_end_min\n";
    for (const auto& r : reports) {
        out += r.group.location + '\t' + r.group.attribute + '\t' +
               detail::join(r.users, ',') + '\t' + to_string(r.conflict_class) + '\t' +
               detail::fixed6(r.entropy) + '\t' + detail::fixed6(r.max_entropy) + '\t' +
               detail::fixed6(r.gain) + '\t' + detail::fixed6(r.proximity) + '\t' +
               detail::fixed6(r.group.span_start) + '\t' + detail::fixed6(r.group.span_end) +
               '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ground truth
// ---------------------------------------------------------------------------

inline std::string save_truth(const std::vector<GroundTruthEntry>& truth) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["conflicts"] = detail::Json::array();
    for (const auto& t : truth) {
        detail::Json jt;
        jt["location"] = t.location;
        jt["attribute"] = t.attribute;
        jt["users"] = t.users;
        jt["class"] = to_string(t.conflict_class);
        jt["expected_gain"] = t.expected_gain;
        doc["conflicts"].push_back(std::move(jt));
    }
    return doc.dump(2) + "\n";
}

inline std::vector<GroundTruthEntry> load_truth(const std::string& text) {
    const detail::Json doc = detail::parse_json(text, "truth file");
    detail::check_schema(doc, "truth file");
    std::vector<GroundTruthEntry> out;
    for (const auto& jt : doc.value("conflicts", detail::Json::array())) {
        GroundTruthEntry t;
        t.location = jt.at("location").get<std::string>();
        t.attribute = jt.at("attribute").get<std::string>();
        t.users = jt.at("users").get<std::vector<std::string>>();
        t.conflict_class = conflict_class_from_string(jt.at("class").get<std::string>());
        t.expected_gain = jt.value("expected_gain", 0.0);
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics and experiment tables
// ---------------------------------------------------------------------------

inline std::string save_metrics(const EvaluationMetrics& m) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["total_truth"] = m.total_truth;
    doc["overall_accuracy"] = m.overall_accuracy;
    doc["unmatched_predictions"] = m.unmatched_predictions;
    doc["confusion"] = detail::Json::object();
    doc["confusion"]["rows"] = {"Strong", "Tau", "Weak", "None"};
    doc["confusion"]["columns"] = {"Strong", "Tau", "Weak", "None", "Missed"};
    doc["confusion"]["matrix"] = detail::Json::array();
    for (const auto& row : m.confusion)
        doc["confusion"]["matrix"].push_back(std::vector<std::size_t>(row.begin(), row.end()));
    doc["per_class"] = detail::Json::object();
    for (std::size_t c = 0; c < kTruthClasses.size(); ++c) {
        detail::Json jc;
        const auto& cm = m.per_class[c];
        jc["precision"] = cm.precision ? detail::Json(*cm.precision) : detail::Json(nullptr);
        jc["recall"] = cm.recall ? detail::Json(*cm.recall) : detail::Json(nullptr);
        jc["f1"] = cm.f1 ? detail::Json(*cm.f1) : detail::Json(nullptr);
        jc["accuracy"] = cm.accuracy;
        doc["per_class"][to_string(kTruthClasses[c])] = std::move(jc);
    }
    return doc.dump(2) + "\n";
}

inline std::string metrics_tsv(const EvaluationMetrics& m) {
    std::string out = "class\tprecision\trecall\tf1\taccuracy\n";
    for (std::size_t c = 0; c < kTruthClasses.size(); ++c) {
        const auto& cm = m.per_class[c];
        out += std::string(to_string(kTruthClasses[c])) + '\t' + detail::opt6(cm.precision) +
               '\t' + detail::opt6(cm.recall) + '\t' + detail::opt6(cm.f1) + '\t' +
               detail::fixed6(cm.accuracy) + '\n';
    }
    out += "overall\tNA\tNA\tNA\t" + detail::fixed6(m.overall_accuracy) + '\n';
    return out;
}

inline std::string save_sweep(const std::vector<SweepRow>& rows) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["rows"] = detail::Json::array();
    for (const auto& row : rows) {
        detail::Json jr;
        jr["mu"] = row.mu;
        for (std::size_t c = 0; c < kTruthClasses.size(); ++c) {
            const std::string key = std::string("recall_") + to_string(kTruthClasses[c]);
            jr[key] = row.recall[c] ? detail::Json(*row.recall[c]) : detail::Json(nullptr);
        }
        doc["rows"].push_back(std::move(jr));
    }
    return doc.dump(2) + "\n";
}

inline std::string sweep_tsv(const std::vector<SweepRow>& rows) {
    std::string out = "mu\trecall_Strong\trecall_Tau\trecall_Weak\trecall_None\n";
    for (const auto& row : rows) {
        out += detail::fixed6(row.mu);
        for (const auto& r : row.recall) out += '\t' + detail::opt6(r);
        out += '\n';
    }
    return out;
}

inline std::string save_scale(const std::vector<ScaleRow>& rows) {
    detail::Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["rows"] = detail::Json::array();
    for (const auto& row : rows)
        doc["rows"].push_back({{"residents", row.residents}, {"conflicts", row.conflicts}});
    return doc.dump(2) + "\n";
}

inline std::string scale_tsv(const std::vector<ScaleRow>& rows) {
    std::string out = "residents\tconflicts\n";
    for (const auto& row : rows)
        out += std::to_string(row.residents) + '\t' + std::to_string(row.conflicts) + '\n';
    return out;
}

}  // namespace conflictlens
