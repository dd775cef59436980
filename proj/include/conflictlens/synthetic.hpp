#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "conflictlens/conflict.hpp"
#include "conflictlens/core.hpp"
#include "conflictlens/evaluate.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Synthetic multi-resident datasets with planted, engine-verified conflicts.
// Generation is reproducible: identical profiles and seeds give identical
// event streams byte for byte.
// ---------------------------------------------------------------------------

/// One resident's daily usage pattern.
struct HabitTemplate {
    std::string user;
    std::string service;
    std::string location;
    std::string attribute;
    double window_start = 0.0;  // minute-of-day
    double window_end = 0.0;
    std::vector<std::pair<std::string, double>> values;  // label -> score, ordered
};

/// Annotation of a conflict the profile intends to produce.
struct PlantedConflict {
    std::string location;
    std::string attribute;
    std::vector<std::string> users;  // sorted
    ConflictClass conflict_class = ConflictClass::None;
};

struct SyntheticProfile {
    std::vector<std::string> residents;
    std::vector<HabitTemplate> templates;
    std::vector<PlantedConflict> planted;
    double jitter_minutes = 0.0;
    double skip_probability = 0.0;
    std::uint64_t seed = 0;
    int days = 10;
    std::string start_date = "2024-01-01";
};

struct SyntheticDataset {
    std::vector<ServiceEvent> events;
    std::vector<GroundTruthEntry> truth;
};

namespace detail {

/// Uniform double in [0,1) from the fixed mt19937_64 stream; avoids the
/// implementation-defined standard distributions so output is portable.
inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double jitter_draw(std::mt19937_64& rng, double jitter_minutes) {
    if (jitter_minutes <= 0.0) return 0.0;
    const long span = 2 * static_cast<long>(jitter_minutes) + 1;
    const long idx = std::min<long>(span - 1, static_cast<long>(unit_draw(rng) * span));
    return static_cast<double>(idx - static_cast<long>(jitter_minutes));
}

/// Balanced dealing of values in declared proportions: each pick maximizes
/// the accumulated deficit, so counts track score*occurrences within one.
class ValueDealer {
public:
    explicit ValueDealer(const std::vector<std::pair<std::string, double>>& values)
        : values_(values), acc_(values.size(), 0.0) {}

    const std::string& next() {
        std::size_t best = 0;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            acc_[i] += values_[i].second;
            if (acc_[i] > acc_[best]) best = i;
        }
        acc_[best] -= 1.0;
        return values_[best].first;
    }

private:
    const std::vector<std::pair<std::string, double>>& values_;
    std::vector<double> acc_;
};

inline ServiceUsageHabit habit_from_template(const HabitTemplate& t) {
    ServiceUsageHabit h;
    h.user_id = t.user;
    h.location = t.location;
    h.window_start = t.window_start;
    h.window_end = t.window_end;
    h.support = 1;
    FuzzyServiceAttribute fsa;
    fsa.fsa_id = t.user + "/" + t.service + "/" + t.attribute;
    fsa.name = t.attribute;
    fsa.service_id = t.service;
    for (const auto& [label, score] : t.values)
        if (score > 0.0) fsa.values[label] += score;
    h.fsas.push_back(std::move(fsa));
    return h;
}

}  // namespace detail

inline void validate(const SyntheticProfile& profile) {
    if (profile.days <= 0) throw std::invalid_argument("profile: days must be positive");
    if (profile.templates.empty()) throw std::invalid_argument("profile: no templates");
    for (const auto& t : profile.templates) {
        if (!(t.window_start < t.window_end) || t.window_start < 0.0 ||
            t.window_end > kMinutesPerDay)
            throw std::invalid_argument("profile: template window of " + t.user +
                                        " outside 00:00-24:00");
        if (t.values.empty())
            throw std::invalid_argument("profile: template of " + t.user + " has no values");
        double sum = 0.0;
        for (const auto& [label, score] : t.values) sum += score;
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("profile: value scores of " + t.user +
                                        " must sum to 1");
        if (std::find(profile.residents.begin(), profile.residents.end(), t.user) ==
            profile.residents.end())
            throw std::invalid_argument("profile: template user " + t.user +
                                        " not in residents");
    }
}

/// Emits `days` days of events in which every template fires daily, subject
/// to start/end jitter and skip noise, dealing attribute values in the
/// declared proportions. Each planted annotation is checked structurally (the
/// annotated residents' windows must form an overlap group with exactly that
/// user set) and semantically (running the engine's own gain and classify on
/// the emitted value distributions must reproduce the annotated class).
inline SyntheticDataset generate_synthetic(const SyntheticProfile& profile) {
    validate(profile);
    std::mt19937_64 rng(profile.seed);
    const std::int64_t base = parse_timestamp(profile.start_date + " 00:00:00");

    SyntheticDataset out;
    std::vector<detail::ValueDealer> dealers;
    dealers.reserve(profile.templates.size());
    for (const auto& t : profile.templates) dealers.emplace_back(t.values);

    // user -> (location, attribute) -> value counts actually emitted
    std::map<std::string, std::map<std::pair<std::string, std::string>,
                                   std::map<std::string, std::size_t>>>
        emitted;

    for (int day = 0; day < profile.days; ++day) {
        for (std::size_t ti = 0; ti < profile.templates.size(); ++ti) {
            const HabitTemplate& t = profile.templates[ti];
            if (profile.skip_probability > 0.0 &&
                detail::unit_draw(rng) < profile.skip_probability)
                continue;
            double start_min = t.window_start + detail::jitter_draw(rng, profile.jitter_minutes);
            double end_min = t.window_end + detail::jitter_draw(rng, profile.jitter_minutes);
            start_min = std::clamp(start_min, 0.0, kMinutesPerDay - 1.0);
            end_min = std::clamp(end_min, start_min + 1.0, kMinutesPerDay);

            const std::string& value = dealers[ti].next();
            const std::int64_t day_base = base + day * kSecondsPerDay;
            ServiceEvent event{
                t.service,
                {{t.attribute, value}},
                TimeInterval(day_base + static_cast<std::int64_t>(std::llround(start_min * 60)),
                             day_base + static_cast<std::int64_t>(std::llround(end_min * 60))),
                t.location,
                t.user};
            out.events.push_back(std::move(event));
            ++emitted[t.user][{t.location, t.attribute}][value];
        }
    }

    std::sort(out.events.begin(), out.events.end(), event_order);

    // Template-level habits, for structural verification of the annotations.
    std::vector<ServiceUsageHabit> template_habits;
    for (const auto& t : profile.templates)
        template_habits.push_back(detail::habit_from_template(t));
    std::map<std::string, std::vector<OverlapGroup>> groups_by_location;
    for (const auto& [location, cluster] : cluster_by_location(template_habits))
        groups_by_location[location] = find_overlap_groups(cluster);

    for (const auto& planted : profile.planted) {
        if (planted.users.size() < 2 ||
            !std::is_sorted(planted.users.begin(), planted.users.end()))
            throw std::invalid_argument("profile: planted conflict needs >= 2 sorted users");

        const OverlapGroup* match = nullptr;
        for (const auto& g : groups_by_location[planted.location]) {
            if (g.attribute == planted.attribute && g.distinct_users() == planted.users) {
                match = &g;
                break;
            }
        }
        if (!match)
            throw std::runtime_error("profile: planted conflict at " + planted.location + "/" +
                                     planted.attribute +
                                     " does not form an overlap group of exactly its users");

        // Consistency table from the values actually emitted.
        ConsistencyTable table;
        std::set<std::string> universe;
        for (const auto& user : planted.users) {
            const auto& counts = emitted[user][{planted.location, planted.attribute}];
            if (counts.empty())
                throw std::runtime_error("profile: planted user " + user +
                                         " emitted no events at " + planted.location);
            for (const auto& [label, n] : counts) universe.insert(label);
        }
        table.value_universe.assign(universe.begin(), universe.end());
        for (const auto& user : planted.users) {
            const auto& counts = emitted[user][{planted.location, planted.attribute}];
            double total = 0.0;
            for (const auto& [label, n] : counts) total += static_cast<double>(n);
            ConsistencyTable::Row row;
            row.user_id = user;
            for (const auto& label : table.value_universe) {
                auto it = counts.find(label);
                row.distribution.push_back(
                    it == counts.end() ? 0.0 : static_cast<double>(it->second) / total);
            }
            table.rows.push_back(std::move(row));
        }

        GroundTruthEntry entry;
        entry.location = planted.location;
        entry.attribute = planted.attribute;
        entry.users = planted.users;
        entry.expected_gain = gain(table);
        entry.conflict_class = classify(entry.expected_gain,
                                        max_entropy(table.value_universe.size()),
                                        table.value_universe.size());
        if (entry.conflict_class != planted.conflict_class)
            throw std::runtime_error(
                "profile: planted conflict at " + planted.location + "/" + planted.attribute +
                " induces class " + to_string(entry.conflict_class) + " but is annotated " +
                to_string(planted.conflict_class));
        out.truth.push_back(std::move(entry));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Profile files
// ---------------------------------------------------------------------------

inline SyntheticProfile load_profile(const std::string& text) {
    using Json = nlohmann::ordered_json;
    Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw std::runtime_error("profile: not valid JSON");
    const std::string found =
        doc.contains("schema_version") ? doc["schema_version"].get<std::string>() : "(none)";
    if (found != "1")
        throw std::runtime_error("profile: schema_version mismatch, expected \"1\", found \"" +
                                 found + "\"");

    SyntheticProfile profile;
    profile.seed = doc.value("seed", std::uint64_t{0});
    profile.days = doc.value("days", 10);
    profile.start_date = doc.value("start_date", std::string("2024-01-01"));
    profile.jitter_minutes = doc.value("jitter_minutes", 0.0);
    profile.skip_probability = doc.value("skip_probability", 0.0);
    profile.residents = doc.value("residents", std::vector<std::string>{});

    for (const auto& jt : doc.value("templates", Json::array())) {
        HabitTemplate t;
        t.user = jt.at("user").get<std::string>();
        t.service = jt.at("service").get<std::string>();
        t.location = jt.at("location").get<std::string>();
        t.attribute = jt.at("attribute").get<std::string>();
        const auto& window = jt.at("window");
        t.window_start = parse_minute_of_day(window.at(0).get<std::string>());
        t.window_end = parse_minute_of_day(window.at(1).get<std::string>());
        for (const auto& [label, score] : jt.at("values").items())
            t.values.emplace_back(label, score.get<double>());
        profile.templates.push_back(std::move(t));
        if (std::find(profile.residents.begin(), profile.residents.end(),
                      profile.templates.back().user) == profile.residents.end())
            profile.residents.push_back(profile.templates.back().user);
    }
    for (const auto& jp : doc.value("planted", Json::array())) {
        PlantedConflict p;
        p.location = jp.at("location").get<std::string>();
        p.attribute = jp.at("attribute").get<std::string>();
        p.users = jp.at("users").get<std::vector<std::string>>();
        std::sort(p.users.begin(), p.users.end());
        p.conflict_class = conflict_class_from_string(jp.at("class").get<std::string>());
        profile.planted.push_back(std::move(p));
    }
    return profile;
}

}  // namespace conflictlens
