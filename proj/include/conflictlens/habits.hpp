#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "conflictlens/core.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Fuzzy service attributes and service usage habits
// ---------------------------------------------------------------------------

/// An attribute of a service together with the consistency score of every
/// value a resident uses: how often their usage takes that value. Scores are
/// strictly positive and sum to 1; zero-score values are omitted.
struct FuzzyServiceAttribute {
    std::string fsa_id;
    std::string name;        // attribute name, e.g. "channel"
    std::string service_id;  // service the attribute belongs to
    std::map<std::string, double> values;  // value label -> consistency score
};

inline constexpr double kScoreSumTolerance = 1e-9;

inline void validate(const FuzzyServiceAttribute& fsa) {
    if (fsa.values.empty())
        throw std::invalid_argument("FSA " + fsa.fsa_id + " has no values");
    double sum = 0.0;
    for (const auto& [label, score] : fsa.values) {
        if (!(score > 0.0))
            throw std::invalid_argument("FSA " + fsa.fsa_id + " value '" + label +
                                        "' has non-positive score");
        sum += score;
    }
    if (std::abs(sum - 1.0) > kScoreSumTolerance)
        throw std::invalid_argument("FSA " + fsa.fsa_id + " scores sum to " +
                                    std::to_string(sum) + ", expected 1");
}

/// A resident's recurring usage window at one location. Simple habits carry
/// one service's attributes; a complex habit merges co-occurring habits and
/// carries attributes of several services.
struct ServiceUsageHabit {
    std::string user_id;
    std::vector<FuzzyServiceAttribute> fsas;  // one per attribute name
    double window_start = 0.0;                // minute-of-day
    double start_tolerance = 0.0;             // +- minutes
    double window_end = 0.0;                  // minute-of-day
    double end_tolerance = 0.0;               // +- minutes
    std::string location;
    std::size_t support = 0;  // contributing event occurrences

    MinuteWindow window() const { return MinuteWindow(window_start, window_end); }

    const FuzzyServiceAttribute* find_attribute(const std::string& name) const {
        for (const auto& fsa : fsas)
            if (fsa.name == name) return &fsa;
        return nullptr;
    }
};

inline void validate(const ServiceUsageHabit& habit) {
    if (!(habit.window_start < habit.window_end))
        throw std::invalid_argument("habit window start must precede end");
    if (habit.start_tolerance < 0.0 || habit.end_tolerance < 0.0)
        throw std::invalid_argument("habit tolerances must be non-negative");
    if (habit.fsas.empty()) throw std::invalid_argument("habit carries no FSA");
    std::set<std::string> names;
    for (const auto& fsa : habit.fsas) {
        validate(fsa);
        if (!names.insert(fsa.name).second)
            throw std::invalid_argument("habit carries duplicate FSA for attribute '" +
                                        fsa.name + "'");
    }
}

struct MiningParams {
    double gap_minutes = 60.0;        // new cluster when start drifts past this
    std::size_t min_support = 5;      // occurrences needed to call it a habit
    double complex_merge_overlap = 0.8;  // window Jaccard for complex merging; >1 disables
};

// ---------------------------------------------------------------------------
// Mining
// ---------------------------------------------------------------------------

/// Consistency scores as relative value frequencies over one resident's
/// events for one service attribute. Input must be non-empty and binned.
inline FuzzyServiceAttribute mine_fsa(const std::vector<ServiceEvent>& events,
                                      const std::string& attribute,
                                      const std::string& fsa_id = {}) {
    std::map<std::string, std::size_t> counts;
    std::string service_id;
    for (const ServiceEvent& e : events) {
        auto it = e.attribute_values.find(attribute);
        if (it == e.attribute_values.end()) continue;
        ++counts[it->second];
        service_id = e.service_id;
    }
    if (counts.empty())
        throw std::invalid_argument("mine_fsa: no events carry attribute '" + attribute + "'");
    std::size_t total = 0;
    for (const auto& [label, c] : counts) total += c;

    FuzzyServiceAttribute fsa;
    fsa.fsa_id = fsa_id.empty() ? service_id + "/" + attribute : fsa_id;
    fsa.name = attribute;
    fsa.service_id = service_id;
    for (const auto& [label, c] : counts)
        fsa.values[label] = static_cast<double>(c) / static_cast<double>(total);
    return fsa;
}

namespace detail {

/// 1-D gap clustering of start minutes: walk the sorted occurrences and open
/// a new cluster whenever the next start drifts more than gap_minutes from
/// the running cluster mean.
inline std::vector<std::vector<std::size_t>> cluster_by_start(
    const std::vector<double>& start_minutes, double gap_minutes) {
    std::vector<std::size_t> order(start_minutes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return start_minutes[a] < start_minutes[b];
    });

    std::vector<std::vector<std::size_t>> clusters;
    double mean = 0.0;
    for (std::size_t idx : order) {
        const double m = start_minutes[idx];
        if (clusters.empty() || m - mean > gap_minutes) {
            clusters.push_back({idx});
            mean = m;
        } else {
            clusters.back().push_back(idx);
            mean += (m - mean) / static_cast<double>(clusters.back().size());
        }
    }
    return clusters;
}

inline double mean_of(const std::vector<double>& xs, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += xs[i];
    return s / static_cast<double>(idx.size());
}

inline double max_abs_deviation(const std::vector<double>& xs,
                                const std::vector<std::size_t>& idx, double center) {
    double dev = 0.0;
    for (std::size_t i : idx) dev = std::max(dev, std::abs(xs[i] - center));
    return dev;
}

/// Window overlap ratio (intersection over union) used for complex-habit
/// merging.
inline double window_jaccard(const ServiceUsageHabit& a, const ServiceUsageHabit& b) {
    const double inter = std::min(a.window_end, b.window_end) -
                         std::max(a.window_start, b.window_start);
    if (inter <= 0.0) return 0.0;
    const double uni = std::max(a.window_end, b.window_end) -
                       std::min(a.window_start, b.window_start);
    return inter / uni;
}

inline bool attribute_names_disjoint(const ServiceUsageHabit& a, const ServiceUsageHabit& b) {
    for (const auto& fa : a.fsas)
        if (b.find_attribute(fa.name)) return false;
    return true;
}

/// Merge b into a: support-weighted window, tolerance envelopes re-centred on
/// the merged window, union of FSAs. Joint support is the smaller of the two.
inline void merge_complex(ServiceUsageHabit& a, const ServiceUsageHabit& b) {
    const double wa = static_cast<double>(a.support);
    const double wb = static_cast<double>(b.support);
    const double start = (a.window_start * wa + b.window_start * wb) / (wa + wb);
    const double end = (a.window_end * wa + b.window_end * wb) / (wa + wb);
    a.start_tolerance = std::max(std::abs(a.window_start - start) + a.start_tolerance,
                                 std::abs(b.window_start - start) + b.start_tolerance);
    a.end_tolerance = std::max(std::abs(a.window_end - end) + a.end_tolerance,
                               std::abs(b.window_end - end) + b.end_tolerance);
    a.window_start = start;
    a.window_end = end;
    a.support = std::min(a.support, b.support);
    for (const auto& fsa : b.fsas) a.fsas.push_back(fsa);
    std::sort(a.fsas.begin(), a.fsas.end(),
              [](const auto& x, const auto& y) { return x.name < y.name; });
}

}  // namespace detail

/// Mines Service Usage Habits from a preprocessed (stabilized, binned) event
/// database. Per (user, service, location), occurrences are gap-clustered by
/// start minute-of-day; every cluster with enough support yields one habit
/// whose window is the cluster mean, tolerances the max absolute deviations
/// and FSAs the value frequencies over the cluster's events. Habits of one
/// user and location whose windows overlap strongly merge into complex
/// habits. Output order is canonical.
inline std::vector<ServiceUsageHabit> mine_habits(const std::vector<ServiceEvent>& events,
                                                  const MiningParams& params = {}) {
    using GroupKey = std::tuple<std::string, std::string, std::string>;  // user, loc, service
    std::map<GroupKey, std::vector<ServiceEvent>> groups;
    for (const ServiceEvent& e : events)
        groups[GroupKey{e.user_id, e.location, e.service_id}].push_back(e);

    std::vector<ServiceUsageHabit> habits;
    for (const auto& [key, group] : groups) {
        const auto& [user, location, service] = key;

        std::vector<double> starts(group.size()), ends(group.size());
        for (std::size_t i = 0; i < group.size(); ++i) {
            starts[i] = group[i].start_minute();
            ends[i] = group[i].end_minute();
        }

        std::size_t cluster_seq = 0;
        for (const auto& cluster : detail::cluster_by_start(starts, params.gap_minutes)) {
            if (cluster.size() < params.min_support) continue;

            ServiceUsageHabit habit;
            habit.user_id = user;
            habit.location = location;
            habit.support = cluster.size();
            habit.window_start = detail::mean_of(starts, cluster);
            habit.window_end = detail::mean_of(ends, cluster);
            habit.start_tolerance =
                detail::max_abs_deviation(starts, cluster, habit.window_start);
            habit.end_tolerance = detail::max_abs_deviation(ends, cluster, habit.window_end);
            if (!(habit.window_start < habit.window_end)) continue;  // degenerate cluster

            std::vector<ServiceEvent> cluster_events;
            cluster_events.reserve(cluster.size());
            for (std::size_t i : cluster) cluster_events.push_back(group[i]);
            std::set<std::string> attribute_names;
            for (const ServiceEvent& e : cluster_events)
                for (const auto& [name, value] : e.attribute_values)
                    attribute_names.insert(name);
            for (const std::string& name : attribute_names) {
                habit.fsas.push_back(
                    mine_fsa(cluster_events, name,
                             user + "/" + location + "/" + service + "/" + name + "#" +
                                 std::to_string(cluster_seq)));
            }
            if (habit.fsas.empty()) continue;  // attribute-less events cannot habit
            ++cluster_seq;
            habits.push_back(std::move(habit));
        }
    }

    // Complex habits: same user and location, strongly overlapping windows,
    // disjoint attribute names.
    if (params.complex_merge_overlap <= 1.0) {
        std::vector<ServiceUsageHabit> merged;
        for (auto& habit : habits) {
            bool absorbed = false;
            for (auto& existing : merged) {
                if (existing.user_id == habit.user_id &&
                    existing.location == habit.location &&
                    detail::window_jaccard(existing, habit) >= params.complex_merge_overlap &&
                    detail::attribute_names_disjoint(existing, habit)) {
                    detail::merge_complex(existing, habit);
                    absorbed = true;
                    break;
                }
            }
            if (!absorbed) merged.push_back(std::move(habit));
        }
        habits = std::move(merged);
    }

    std::sort(habits.begin(), habits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user_id, a.location, a.window_start, a.window_end) <
               std::tie(b.user_id, b.location, b.window_start, b.window_end);
    });
    return habits;
}

}  // namespace conflictlens
