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
#include "conflictlens/habits.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Conflict engine: overlap-group selection, entropy / information-gain
// dissimilarity scoring, temporal-proximity pruning and classification.
// ---------------------------------------------------------------------------

enum class ConflictClass { Strong, Tau, Weak, None, Pruned };

inline const char* to_string(ConflictClass c) {
    switch (c) {
        case ConflictClass::Strong: return "Strong";
        case ConflictClass::Tau: return "Tau";
        case ConflictClass::Weak: return "Weak";
        case ConflictClass::None: return "None";
        case ConflictClass::Pruned: return "Pruned";
    }
    return "?";
}

inline ConflictClass conflict_class_from_string(const std::string& s) {
    if (s == "Strong") return ConflictClass::Strong;
    if (s == "Tau") return ConflictClass::Tau;
    if (s == "Weak") return ConflictClass::Weak;
    if (s == "None") return ConflictClass::None;
    if (s == "Pruned") return ConflictClass::Pruned;
    throw std::invalid_argument("unknown conflict class: " + s);
}

/// One endpoint of a habit window in the group's time-sorted symbol sequence.
/// Each habit contributes exactly one start (+) and one end (-) symbol.
struct HabitSymbol {
    std::size_t habit_index;  // into OverlapGroup::habits
    bool is_start;            // polarity: + when true, - when false
    double minute;            // minute-of-day
};

/// A maximal set of temporally co-active habits of at least two distinct
/// users at one location, over one attribute. The symbol sequence holds the
/// habits' window endpoints in non-decreasing time order; the span runs from
/// the first symbol t_1 to the last symbol t_2n.
struct OverlapGroup {
    std::string location;
    std::string attribute;
    std::vector<ServiceUsageHabit> habits;
    std::vector<HabitSymbol> symbols;
    double span_start = 0.0;
    double span_end = 0.0;

    std::vector<std::string> distinct_users() const {
        std::set<std::string> users;
        for (const auto& h : habits) users.insert(h.user_id);
        return {users.begin(), users.end()};
    }
};

/// Per-resident probability distributions over one attribute's values.
/// Rows sum to 1; mass weighs residents in the mixture (equal by default).
struct ConsistencyTable {
    struct Row {
        std::string user_id;
        std::vector<double> distribution;  // aligned with value_universe
        double mass = 1.0;
    };
    std::vector<std::string> value_universe;  // ordered, no duplicates
    std::vector<Row> rows;
};

/// Classified conflict for one overlap group. Pruned groups skip the
/// entropy/gain computation and carry zeros there.
struct ConflictReport {
    OverlapGroup group;
    double entropy = 0.0;      // bits, of the residents' mixture distribution
    double max_entropy = 0.0;  // bits, log2 of the value-universe size
    double gain = 0.0;         // bits
    double proximity = 0.0;    // in (0, 1]
    ConflictClass conflict_class = ConflictClass::None;
    std::vector<std::string> users;
};

// ---------------------------------------------------------------------------
// Information measures
// ---------------------------------------------------------------------------

/// Shannon entropy in bits, with the 0*log(0) = 0 convention. The input must
/// be a probability distribution: non-negative entries summing to 1.
inline double entropy(const std::vector<double>& distribution) {
    if (distribution.empty()) throw std::invalid_argument("entropy: empty distribution");
    double sum = 0.0;
    for (double p : distribution) {
        if (p < 0.0) throw std::invalid_argument("entropy: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kScoreSumTolerance)
        throw std::invalid_argument("entropy: probabilities sum to " + std::to_string(sum));
    double h = 0.0;
    for (double p : distribution)
        if (p > 0.0) h -= p * std::log2(p);
    return h;
}

/// Entropy ceiling log2(n) for an attribute with n possible values.
inline double max_entropy(std::size_t n) {
    if (n == 0) throw std::invalid_argument("max_entropy: n must be positive");
    return std::log2(static_cast<double>(n));
}

inline void validate(const ConsistencyTable& table) {
    const std::size_t n = table.value_universe.size();
    if (n == 0) throw std::invalid_argument("consistency table: empty value universe");
    if (table.rows.size() < 2)
        throw std::invalid_argument("consistency table: needs at least two rows");
    std::set<std::string> seen(table.value_universe.begin(), table.value_universe.end());
    if (seen.size() != n)
        throw std::invalid_argument("consistency table: duplicate values in universe");
    for (const auto& row : table.rows) {
        if (row.distribution.size() != n)
            throw std::invalid_argument("consistency table: row width mismatch for user " +
                                        row.user_id);
        if (!(row.mass > 0.0))
            throw std::invalid_argument("consistency table: non-positive row mass");
        double sum = 0.0;
        for (double p : row.distribution) {
            if (p < 0.0)
                throw std::invalid_argument("consistency table: negative score for user " +
                                            row.user_id);
            sum += p;
        }
        if (std::abs(sum - 1.0) > kScoreSumTolerance)
            throw std::invalid_argument("consistency table: row of user " + row.user_id +
                                        " sums to " + std::to_string(sum));
    }
}

/// Mass-weighted mixture of the rows: the overall value distribution.
inline std::vector<double> mixture_distribution(const ConsistencyTable& table) {
    double total_mass = 0.0;
    for (const auto& row : table.rows) total_mass += row.mass;
    std::vector<double> mix(table.value_universe.size(), 0.0);
    for (const auto& row : table.rows) {
        const double w = row.mass / total_mass;
        for (std::size_t v = 0; v < mix.size(); ++v) mix[v] += w * row.distribution[v];
    }
    return mix;
}

/// Information gain G(X,Y) = E(X) - E(X|Y): entropy of the mixture minus the
/// mass-weighted mean of the per-resident row entropies. Measures how far the
/// residents' value distributions lie apart; clamped at zero against
/// floating-point error.
inline double gain(const ConsistencyTable& table) {
    validate(table);
    const double e_mixture = entropy(mixture_distribution(table));
    double total_mass = 0.0;
    for (const auto& row : table.rows) total_mass += row.mass;
    double e_conditional = 0.0;
    for (const auto& row : table.rows)
        e_conditional += row.mass / total_mass * entropy(row.distribution);
    return std::max(0.0, e_mixture - e_conditional);
}

inline constexpr double kGainEpsilon = 1e-9;  // below this, habits are identical

/// Conflict class from the gain score relative to the entropy ceiling:
/// Strong in [e_max/2, e_max], Tau in [e_max/2^n, e_max/2), Weak above zero
/// below the Tau floor, None at (numerically) zero gain. Shared band
/// boundaries resolve to the stronger class.
inline ConflictClass classify(double gain_bits, double e_max, std::size_t n) {
    if (n == 0) throw std::invalid_argument("classify: n must be positive");
    if (gain_bits < 0.0) throw std::invalid_argument("classify: negative gain");
    if (gain_bits > e_max + kGainEpsilon)
        throw std::invalid_argument("classify: gain " + std::to_string(gain_bits) +
                                    " exceeds max entropy " + std::to_string(e_max));
    if (gain_bits <= kGainEpsilon) return ConflictClass::None;
    if (gain_bits >= e_max / 2.0) return ConflictClass::Strong;
    const int exponent = n > 1024 ? 1024 : static_cast<int>(n);
    if (gain_bits >= std::ldexp(e_max, -exponent)) return ConflictClass::Tau;
    return ConflictClass::Weak;
}

// ---------------------------------------------------------------------------
// Overlap group selection
// ---------------------------------------------------------------------------

/// Partition of habits keyed by exact location-name match.
inline std::map<std::string, std::vector<ServiceUsageHabit>> cluster_by_location(
    const std::vector<ServiceUsageHabit>& habits) {
    std::map<std::string, std::vector<ServiceUsageHabit>> clusters;
    for (const auto& h : habits) clusters[h.location].push_back(h);
    return clusters;
}

namespace detail {

struct SweepPoint {
    double minute;
    bool is_start;  // ends sort before starts at equal time: meets is no overlap
    std::size_t habit;
};

inline bool sweep_order(const SweepPoint& a, const SweepPoint& b) {
    return std::tie(a.minute, a.is_start, a.habit) < std::tie(b.minute, b.is_start, b.habit);
}

inline bool co_active(const std::map<std::size_t, const ServiceUsageHabit*>& active) {
    if (active.size() < 2) return false;
    std::set<std::string> users;
    for (const auto& [idx, habit] : active) users.insert(habit->user_id);
    return users.size() >= 2;
}

inline OverlapGroup make_group(const std::string& location, const std::string& attribute,
                               const std::vector<ServiceUsageHabit>& cluster,
                               const std::set<std::size_t>& members) {
    OverlapGroup group;
    group.location = location;
    group.attribute = attribute;
    for (std::size_t idx : members) group.habits.push_back(cluster[idx]);
    std::sort(group.habits.begin(), group.habits.end(), [](const auto& a, const auto& b) {
        return std::tie(a.window_start, a.window_end, a.user_id) <
               std::tie(b.window_start, b.window_end, b.user_id);
    });
    for (std::size_t i = 0; i < group.habits.size(); ++i) {
        group.symbols.push_back({i, true, group.habits[i].window_start});
        group.symbols.push_back({i, false, group.habits[i].window_end});
    }
    std::sort(group.symbols.begin(), group.symbols.end(), [](const auto& a, const auto& b) {
        return std::tie(a.minute, a.is_start, a.habit_index) <
               std::tie(b.minute, b.is_start, b.habit_index);
    });
    group.span_start = group.symbols.front().minute;
    group.span_end = group.symbols.back().minute;
    return group;
}

}  // namespace detail

/// Selects overlapping service usage habits within one location cluster. Per
/// attribute name, a sweep over the sorted window endpoints emits one group
/// for each maximal run during which at least two habits of at least two
/// distinct users are simultaneously active. Habits never co-active with
/// another user's habit are excluded. Windows merely touching at one point do
/// not overlap.
inline std::vector<OverlapGroup> find_overlap_groups(
    const std::vector<ServiceUsageHabit>& cluster) {
    if (cluster.empty()) return {};
    const std::string& location = cluster.front().location;
    for (const auto& h : cluster)
        if (h.location != location)
            throw std::invalid_argument("find_overlap_groups: habits span locations");

    std::set<std::string> attributes;
    for (const auto& h : cluster)
        for (const auto& fsa : h.fsas) attributes.insert(fsa.name);

    std::vector<OverlapGroup> groups;
    for (const std::string& attribute : attributes) {
        std::vector<detail::SweepPoint> points;
        for (std::size_t i = 0; i < cluster.size(); ++i) {
            if (!cluster[i].find_attribute(attribute)) continue;
            points.push_back({cluster[i].window_start, true, i});
            points.push_back({cluster[i].window_end, false, i});
        }
        std::sort(points.begin(), points.end(), detail::sweep_order);

        std::map<std::size_t, const ServiceUsageHabit*> active;
        std::set<std::size_t> run_members;
        bool in_run = false;
        for (const auto& p : points) {
            if (p.is_start) {
                active.emplace(p.habit, &cluster[p.habit]);
                if (detail::co_active(active)) {
                    if (!in_run) {
                        in_run = true;
                        for (const auto& [idx, habit] : active) run_members.insert(idx);
                    } else {
                        run_members.insert(p.habit);
                    }
                }
            } else {
                active.erase(p.habit);
                if (in_run && !detail::co_active(active)) {
                    groups.push_back(
                        detail::make_group(location, attribute, cluster, run_members));
                    run_members.clear();
                    in_run = false;
                }
            }
        }
    }

    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        return std::tie(a.attribute, a.span_start, a.span_end) <
               std::tie(b.attribute, b.span_start, b.span_end);
    });
    return groups;
}

// ---------------------------------------------------------------------------
// Temporal proximity
// ---------------------------------------------------------------------------

/// Average fraction of the group's span during which its habits are active:
/// the integral of the active-habit count over [t_1, t_2n], evaluated
/// piecewise-constant between the sorted symbol times, divided by span
/// duration times habit count. 1 means all windows coincide.
inline double temporal_proximity(const OverlapGroup& group) {
    const double span = group.span_end - group.span_start;
    if (!(span > 0.0))
        throw std::invalid_argument("temporal_proximity: degenerate zero-duration span");
    double integral = 0.0;
    double prev = group.span_start;
    int active = 0;
    for (const auto& symbol : group.symbols) {
        integral += static_cast<double>(active) * (symbol.minute - prev);
        prev = symbol.minute;
        active += symbol.is_start ? 1 : -1;
    }
    return integral / (span * static_cast<double>(group.habits.size()));
}

// ---------------------------------------------------------------------------
// Detection
// ---------------------------------------------------------------------------

/// Consistency table of one overlap group: one row per distinct user, the
/// support-weighted blend of that user's value scores for the group's
/// attribute, over the universe of values any participant uses.
inline ConsistencyTable consistency_table(const OverlapGroup& group) {
    std::set<std::string> universe;
    std::map<std::string, std::map<std::string, double>> weighted;  // user -> label -> mass
    for (const auto& habit : group.habits) {
        const FuzzyServiceAttribute* fsa = habit.find_attribute(group.attribute);
        if (!fsa)
            throw std::invalid_argument("group habit lacks attribute " + group.attribute);
        for (const auto& [label, score] : fsa->values) {
            universe.insert(label);
            weighted[habit.user_id][label] +=
                score * static_cast<double>(std::max<std::size_t>(habit.support, 1));
        }
    }

    ConsistencyTable table;
    table.value_universe.assign(universe.begin(), universe.end());
    for (const auto& [user, masses] : weighted) {
        double total = 0.0;
        for (const auto& [label, m] : masses) total += m;
        ConsistencyTable::Row row;
        row.user_id = user;
        row.distribution.reserve(table.value_universe.size());
        for (const auto& label : table.value_universe) {
            auto it = masses.find(label);
            row.distribution.push_back(it == masses.end() ? 0.0 : it->second / total);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Runs conflict detection over the overlap groups: groups whose temporal
/// proximity falls below mu are pruned without scoring; the rest are scored
/// by entropy and gain over their consistency table and classified. Reports
/// are ordered by (location, attribute, span start, users).
inline std::vector<ConflictReport> detect(const std::vector<OverlapGroup>& groups,
                                          double mu) {
    if (mu < 0.0 || mu > 1.0)
        throw std::invalid_argument("detect: proximity threshold must lie in [0,1]");

    std::vector<ConflictReport> reports;
    reports.reserve(groups.size());
    for (const auto& group : groups) {
        ConflictReport report;
        report.group = group;
        report.users = group.distinct_users();
        report.proximity = temporal_proximity(group);
        if (report.proximity < mu) {
            report.conflict_class = ConflictClass::Pruned;
        } else {
            const ConsistencyTable table = consistency_table(group);
            report.entropy = entropy(mixture_distribution(table));
            report.max_entropy = max_entropy(table.value_universe.size());
            report.gain = gain(table);
            report.conflict_class =
                classify(report.gain, report.max_entropy, table.value_universe.size());
        }
        reports.push_back(std::move(report));
    }

    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.group.location, a.group.attribute, a.group.span_start, a.users) <
               std::tie(b.group.location, b.group.attribute, b.group.span_start, b.users);
    });
    return reports;
}

/// Full pipeline step: location clustering, overlap selection, detection.
inline std::vector<ConflictReport> detect_conflicts(
    const std::vector<ServiceUsageHabit>& habits, double mu) {
    std::vector<ConflictReport> reports;
    for (const auto& [location, cluster] : cluster_by_location(habits)) {
        auto partial = detect(find_overlap_groups(cluster), mu);
        reports.insert(reports.end(), std::make_move_iterator(partial.begin()),
                       std::make_move_iterator(partial.end()));
    }
    std::sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.group.location, a.group.attribute, a.group.span_start, a.users) <
               std::tie(b.group.location, b.group.attribute, b.group.span_start, b.users);
    });
    return reports;
}

}  // namespace conflictlens
