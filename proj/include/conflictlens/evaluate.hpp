#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conflictlens/conflict.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Evaluation against planted ground truth. Conflicts are identified by the
// (location, attribute, resident-set) key.
// ---------------------------------------------------------------------------

/// One expected conflict of a planted dataset.
struct GroundTruthEntry {
    std::string location;
    std::string attribute;
    std::vector<std::string> users;  // sorted, distinct
    ConflictClass conflict_class = ConflictClass::None;  // never Pruned
    double expected_gain = 0.0;
};

/// Projection of a ConflictReport down to what evaluation needs.
struct PredictedConflict {
    std::string location;
    std::string attribute;
    std::vector<std::string> users;
    ConflictClass conflict_class = ConflictClass::None;
    double gain = 0.0;
    double proximity = 0.0;
};

inline PredictedConflict to_predicted(const ConflictReport& report) {
    return {report.group.location, report.group.attribute, report.users,
            report.conflict_class, report.gain, report.proximity};
}

inline std::vector<PredictedConflict> to_predicted(const std::vector<ConflictReport>& reports) {
    std::vector<PredictedConflict> out;
    out.reserve(reports.size());
    for (const auto& r : reports) out.push_back(to_predicted(r));
    return out;
}

/// The four real classes, in confusion-matrix order. Pruned is not a class a
/// conflict can truly have; pruned predictions count as misses.
inline constexpr std::array<ConflictClass, 4> kTruthClasses = {
    ConflictClass::Strong, ConflictClass::Tau, ConflictClass::Weak, ConflictClass::None};

inline std::size_t class_index(ConflictClass c) {
    for (std::size_t i = 0; i < kTruthClasses.size(); ++i)
        if (kTruthClasses[i] == c) return i;
    throw std::invalid_argument("not a ground-truth class: " + std::string(to_string(c)));
}

/// Per-class one-vs-rest metrics. Ratios with a zero denominator are
/// undefined and reported as absent, never as 0.
struct EvaluationMetrics {
    struct ClassMetrics {
        std::optional<double> precision;
        std::optional<double> recall;
        std::optional<double> f1;
        double accuracy = 0.0;
    };
    // Rows: truth class. Columns: predicted Strong, Tau, Weak, None, Missed
    // (pruned or absent). Row sums equal ground-truth class counts.
    std::array<std::array<std::size_t, 5>, 4> confusion{};
    std::array<ClassMetrics, 4> per_class{};
    double overall_accuracy = 0.0;  // trace / total truth entries
    std::size_t total_truth = 0;
    std::size_t unmatched_predictions = 0;  // predicted keys absent from truth
};

namespace detail {

inline std::string conflict_key(const std::string& location, const std::string& attribute,
                                const std::vector<std::string>& users) {
    std::string key = location + '\x1f' + attribute;
    for (const auto& u : users) key += '\x1f' + u;
    return key;
}

inline bool stronger(ConflictClass a, ConflictClass b) {
    auto rank = [](ConflictClass c) {
        switch (c) {
            case ConflictClass::Strong: return 4;
            case ConflictClass::Tau: return 3;
            case ConflictClass::Weak: return 2;
            case ConflictClass::None: return 1;
            case ConflictClass::Pruned: return 0;
        }
        return 0;
    };
    return rank(a) > rank(b);
}

}  // namespace detail

/// Scores predictions against ground truth with standard per-class
/// one-vs-rest metrics. Pruned predictions count as missed: a false negative
/// for the true class. Several groups may share a key (the same residents at
/// the same place, morning and evening); the strongest prediction per key
/// counts. Malformed or duplicate truth entries are an error.
inline EvaluationMetrics evaluate(const std::vector<PredictedConflict>& predicted,
                                  const std::vector<GroundTruthEntry>& truth) {
    if (truth.empty()) throw std::invalid_argument("evaluate: empty ground truth");

    std::map<std::string, ConflictClass> truth_by_key;
    for (const auto& entry : truth) {
        if (entry.location.empty() || entry.attribute.empty() || entry.users.size() < 2)
            throw std::invalid_argument("evaluate: malformed truth entry at location '" +
                                        entry.location + "'");
        if (!std::is_sorted(entry.users.begin(), entry.users.end()))
            throw std::invalid_argument("evaluate: truth users must be sorted");
        if (entry.conflict_class == ConflictClass::Pruned)
            throw std::invalid_argument("evaluate: Pruned is not a ground-truth class");
        const std::string key =
            detail::conflict_key(entry.location, entry.attribute, entry.users);
        if (!truth_by_key.emplace(key, entry.conflict_class).second)
            throw std::invalid_argument("evaluate: duplicate truth key for location '" +
                                        entry.location + "', attribute '" + entry.attribute +
                                        "'");
    }

    std::map<std::string, ConflictClass> predicted_by_key;
    for (const auto& p : predicted) {
        std::vector<std::string> users = p.users;
        std::sort(users.begin(), users.end());
        const std::string key = detail::conflict_key(p.location, p.attribute, users);
        auto [it, fresh] = predicted_by_key.emplace(key, p.conflict_class);
        if (!fresh && detail::stronger(p.conflict_class, it->second))
            it->second = p.conflict_class;
    }

    EvaluationMetrics m;
    m.total_truth = truth_by_key.size();

    // Predictions per class, counting false positives outside the truth set.
    std::array<std::size_t, 4> predicted_count{};
    for (const auto& [key, cls] : predicted_by_key) {
        if (cls != ConflictClass::Pruned) ++predicted_count[class_index(cls)];
        if (!truth_by_key.count(key)) ++m.unmatched_predictions;
    }

    for (const auto& [key, truth_class] : truth_by_key) {
        const std::size_t row = class_index(truth_class);
        auto it = predicted_by_key.find(key);
        if (it == predicted_by_key.end() || it->second == ConflictClass::Pruned)
            ++m.confusion[row][4];  // missed
        else
            ++m.confusion[row][class_index(it->second)];
    }

    std::array<std::size_t, 4> truth_count{};
    std::size_t diagonal = 0;
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 5; ++c) truth_count[r] += m.confusion[r][c];
        diagonal += m.confusion[r][r];
    }
    m.overall_accuracy = static_cast<double>(diagonal) / static_cast<double>(m.total_truth);

    for (std::size_t c = 0; c < 4; ++c) {
        auto& cm = m.per_class[c];
        const std::size_t tp = m.confusion[c][c];
        std::size_t predicted_in_truth = 0;
        for (std::size_t r = 0; r < 4; ++r) predicted_in_truth += m.confusion[r][c];
        if (truth_count[c] > 0)
            cm.recall = static_cast<double>(tp) / static_cast<double>(truth_count[c]);
        if (predicted_count[c] > 0)
            cm.precision = static_cast<double>(tp) / static_cast<double>(predicted_count[c]);
        if (cm.precision && cm.recall && (*cm.precision + *cm.recall) > 0.0)
            cm.f1 = 2.0 * *cm.precision * *cm.recall / (*cm.precision + *cm.recall);
        const std::size_t errors =
            (truth_count[c] - tp) + (predicted_in_truth - tp);  // FN + FP within truth set
        cm.accuracy = static_cast<double>(m.total_truth - errors) /
                      static_cast<double>(m.total_truth);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Experiment harnesses
// ---------------------------------------------------------------------------

struct SweepRow {
    double mu = 0.0;
    std::array<std::optional<double>, 4> recall;  // per kTruthClasses
};

/// Runs detection at each threshold and tabulates per-class recall.
inline std::vector<SweepRow> sweep_threshold(const std::vector<ServiceUsageHabit>& habits,
                                             const std::vector<GroundTruthEntry>& truth,
                                             const std::vector<double>& mus) {
    std::vector<SweepRow> rows;
    for (double mu : mus) {
        if (mu < 0.0 || mu > 1.0)
            throw std::invalid_argument("sweep_threshold: mu outside [0,1]");
        const EvaluationMetrics m = evaluate(to_predicted(detect_conflicts(habits, mu)), truth);
        SweepRow row;
        row.mu = mu;
        for (std::size_t c = 0; c < 4; ++c) row.recall[c] = m.per_class[c].recall;
        rows.push_back(row);
    }
    return rows;
}

struct ScaleRow {
    std::size_t residents = 0;
    std::size_t conflicts = 0;  // reports classified Strong, Tau or Weak
};

/// Conflict counts across a family of habit databases that differ in
/// resident count (nested profiles).
inline std::vector<ScaleRow> scale_residents(
    const std::vector<std::vector<ServiceUsageHabit>>& habit_databases, double mu = 0.0) {
    std::vector<ScaleRow> rows;
    for (const auto& habits : habit_databases) {
        std::set<std::string> residents;
        for (const auto& h : habits) residents.insert(h.user_id);
        ScaleRow row;
        row.residents = residents.size();
        for (const auto& report : detect_conflicts(habits, mu)) {
            switch (report.conflict_class) {
                case ConflictClass::Strong:
                case ConflictClass::Tau:
                case ConflictClass::Weak:
                    ++row.conflicts;
                    break;
                default:
                    break;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace conflictlens
