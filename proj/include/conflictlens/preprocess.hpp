#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "conflictlens/core.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Statistical binning: continuous attribute values are mapped onto categorical
// labels before habit consistency scores are computed.
// ---------------------------------------------------------------------------

/// Partition of the real line into labelled bins. The two outer bins are
/// unbounded below the first and above the last edge.
struct BinScheme {
    std::string attribute;
    std::vector<double> edges;        // strictly increasing cut points
    std::vector<std::string> labels;  // labels.size() == edges.size() + 1

    /// Bin label for a value. Values equal to an edge fall in the lower bin.
    const std::string& label_for(double value) const {
        std::size_t idx = 0;
        while (idx < edges.size() && value > edges[idx]) ++idx;
        return labels[idx];
    }
};

namespace detail {

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace detail

/// Optimal 1-D binning: splits the sorted values into k contiguous groups
/// minimizing total within-bin sum of squared deviations, by exact dynamic
/// programming over the distinct values. Edges sit at midpoints between
/// adjacent groups. Throws when k exceeds the distinct-value count.
inline BinScheme fit_bins(std::vector<double> values, std::size_t k,
                          const std::string& attribute = {}) {
    if (values.empty()) throw std::invalid_argument("fit_bins: no values");
    if (k == 0) throw std::invalid_argument("fit_bins: k must be positive");
    std::sort(values.begin(), values.end());

    // Collapse to distinct values with multiplicities so a bin edge can never
    // split a run of equal values.
    std::vector<double> v;
    std::vector<double> w;
    for (double x : values) {
        if (!v.empty() && x == v.back()) {
            w.back() += 1.0;
        } else {
            v.push_back(x);
            w.push_back(1.0);
        }
    }
    const std::size_t n = v.size();
    if (k > n)
        throw std::invalid_argument("fit_bins: bin count " + std::to_string(k) +
                                    " exceeds " + std::to_string(n) + " distinct values");

    // Prefix sums of weight, weighted value, weighted square.
    std::vector<double> pw(n + 1, 0.0), ps(n + 1, 0.0), pq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pw[i + 1] = pw[i] + w[i];
        ps[i + 1] = ps[i] + w[i] * v[i];
        pq[i + 1] = pq[i] + w[i] * v[i] * v[i];
    }
    auto sse = [&](std::size_t i, std::size_t j) {  // over v[i..j] inclusive
        const double weight = pw[j + 1] - pw[i];
        const double sum = ps[j + 1] - ps[i];
        const double sq = pq[j + 1] - pq[i];
        return std::max(0.0, sq - sum * sum / weight);
    };

    constexpr double kInf = std::numeric_limits<double>::infinity();
    // dp[m][j]: best cost of splitting v[0..j] into m groups.
    std::vector<std::vector<double>> dp(k + 1, std::vector<double>(n, kInf));
    std::vector<std::vector<std::size_t>> cut(k + 1, std::vector<std::size_t>(n, 0));
    for (std::size_t j = 0; j < n; ++j) dp[1][j] = sse(0, j);
    for (std::size_t m = 2; m <= k; ++m) {
        for (std::size_t j = m - 1; j < n; ++j) {
            for (std::size_t i = m - 1; i <= j; ++i) {
                const double cost = dp[m - 1][i - 1] + sse(i, j);
                if (cost < dp[m][j]) {
                    dp[m][j] = cost;
                    cut[m][j] = i;
                }
            }
        }
    }

    // Recover group boundaries (index of first value in each group).
    std::vector<std::size_t> firsts(k);
    {
        std::size_t j = n - 1;
        for (std::size_t m = k; m >= 1; --m) {
            firsts[m - 1] = (m == 1) ? 0 : cut[m][j];
            if (m > 1) j = cut[m][j] - 1;
        }
    }

    BinScheme scheme;
    scheme.attribute = attribute;
    for (std::size_t g = 0; g < k; ++g) {
        const std::size_t lo = firsts[g];
        const std::size_t hi = (g + 1 < k) ? firsts[g + 1] - 1 : n - 1;
        if (g + 1 < k) scheme.edges.push_back((v[hi] + v[firsts[g + 1]]) / 2.0);
        std::string label = detail::format_number(v[lo]);
        if (hi > lo) label += ".." + detail::format_number(v[hi]);
        scheme.labels.push_back(label);
    }
    return scheme;
}

/// Total within-bin SSE of a k-way contiguous split; exposed so tests can
/// compare the DP against exhaustive enumeration.
inline double binning_cost(const std::vector<double>& sorted_values,
                           const std::vector<std::size_t>& group_of) {
    std::map<std::size_t, std::pair<double, double>> acc;  // group -> (weight, sum)
    for (std::size_t i = 0; i < sorted_values.size(); ++i) {
        auto& [cnt, sum] = acc[group_of[i]];
        cnt += 1.0;
        sum += sorted_values[i];
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < sorted_values.size(); ++i) {
        const auto& [cnt, sum] = acc[group_of[i]];
        const double d = sorted_values[i] - sum / cnt;
        cost += d * d;
    }
    return cost;
}

// ---------------------------------------------------------------------------
// Value stabilization: rapid successive changes (channel surfing) collapse to
// the final settled value before habits are mined.
// ---------------------------------------------------------------------------

/// Collapses, within each (service, user, location) stream, every run of
/// events whose successive starts lie within settle_window seconds into a
/// single event carrying the run's earliest start, the last event's end and
/// the last event's attribute values. Input must be sorted by start time.
inline std::vector<ServiceEvent> stabilize(const std::vector<ServiceEvent>& events,
                                           std::int64_t settle_window_seconds) {
    if (settle_window_seconds <= 0)
        throw std::invalid_argument("stabilize: settle window must be positive");
    for (std::size_t i = 1; i < events.size(); ++i)
        if (events[i].interval.start() < events[i - 1].interval.start())
            throw std::invalid_argument("stabilize: events not sorted by start time");

    using StreamKey = std::tuple<std::string, std::string, std::string>;
    struct Run {
        std::size_t first;
        std::size_t last;
    };
    std::map<StreamKey, Run> open;
    std::vector<std::pair<std::size_t, ServiceEvent>> out;  // (first index, event)

    auto flush = [&](const Run& run) {
        const ServiceEvent& first = events[run.first];
        const ServiceEvent& last = events[run.last];
        ServiceEvent merged = last;
        merged.interval = TimeInterval(first.interval.start(), last.interval.end());
        out.emplace_back(run.first, std::move(merged));
    };

    for (std::size_t i = 0; i < events.size(); ++i) {
        const ServiceEvent& e = events[i];
        StreamKey key{e.service_id, e.user_id, e.location};
        auto it = open.find(key);
        if (it == open.end()) {
            open.emplace(key, Run{i, i});
            continue;
        }
        const Run& run = it->second;
        const bool within_window =
            e.interval.start() - events[run.last].interval.start() <= settle_window_seconds;
        // Runs never merge across midnight; ingestion splits events there and
        // the merged interval must stay within one day.
        const bool same_day = e.interval.end() <=
                              day_start(events[run.first].interval.start()) + kSecondsPerDay;
        if (within_window && same_day) {
            it->second.last = i;
        } else {
            flush(run);
            it->second = Run{i, i};
        }
    }
    for (const auto& [key, run] : open) flush(run);

    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<ServiceEvent> result;
    result.reserve(out.size());
    for (auto& [idx, ev] : out) result.push_back(std::move(ev));
    return result;
}

/// Attribute is numeric when every observed value parses fully as a number.
inline bool is_numeric_value(const std::string& text) {
    if (text.empty()) return false;
    char* end = nullptr;
    std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

/// Fits one shared BinScheme per numeric attribute over the whole home and
/// rewrites event values with bin labels. Attributes with any non-numeric
/// value are left untouched. k is capped at the distinct-value count.
inline std::vector<BinScheme> bin_numeric_attributes(std::vector<ServiceEvent>& events,
                                                     std::size_t k) {
    std::map<std::string, std::vector<double>> numeric;
    std::map<std::string, bool> all_numeric;
    for (const ServiceEvent& e : events) {
        for (const auto& [name, value] : e.attribute_values) {
            auto [it, fresh] = all_numeric.emplace(name, true);
            if (!is_numeric_value(value)) {
                it->second = false;
            } else if (it->second) {
                numeric[name].push_back(std::strtod(value.c_str(), nullptr));
            }
        }
    }

    std::vector<BinScheme> schemes;
    for (auto& [name, values] : numeric) {
        if (!all_numeric[name] || values.empty()) continue;
        std::vector<double> distinct = values;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        schemes.push_back(fit_bins(values, std::min(k, distinct.size()), name));
    }

    for (ServiceEvent& e : events) {
        for (auto& [name, value] : e.attribute_values) {
            for (const BinScheme& s : schemes) {
                if (s.attribute == name) {
                    value = s.label_for(std::strtod(value.c_str(), nullptr));
                    break;
                }
            }
        }
    }
    return schemes;
}

}  // namespace conflictlens
