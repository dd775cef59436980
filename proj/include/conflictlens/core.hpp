#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace conflictlens {

inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr double kMinutesPerDay = 1440.0;

// ---------------------------------------------------------------------------
// Civil time. Timestamps are absolute local-time seconds since 1970-01-01;
// no time zones, no leap seconds.
// ---------------------------------------------------------------------------

/// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

/// Inverse of days_from_civil.
inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

/// Parses "YYYY-MM-DD HH:MM:SS" into absolute seconds. Throws on malformed input.
inline std::int64_t parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0, consumed = 0;
    char sep = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &s,
                    &consumed) != 7 ||
        (sep != ' ' && sep != 'T') || consumed != static_cast<int>(text.size()))
        throw std::invalid_argument("malformed timestamp: " + text);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        s < 0 || s > 59)
        throw std::invalid_argument("timestamp field out of range: " + text);
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) *
               kSecondsPerDay +
           h * 3600 + mi * 60 + s;
}

/// Formats absolute seconds as "YYYY-MM-DD HH:MM:SS".
inline std::string format_timestamp(std::int64_t t) {
    std::int64_t days = t / kSecondsPerDay;
    std::int64_t sod = t % kSecondsPerDay;
    if (sod < 0) {
        sod += kSecondsPerDay;
        --days;
    }
    int y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02ld:%02ld:%02ld", y, m, d,
                  static_cast<long>(sod / 3600), static_cast<long>(sod / 60 % 60),
                  static_cast<long>(sod % 60));
    return buf;
}

/// Parses "HH:MM" or "HH:MM:SS" into minute-of-day. 24:00 is accepted as 1440.
inline double parse_minute_of_day(const std::string& text) {
    int h = 0, mi = 0, s = 0, consumed = 0;
    int n = std::sscanf(text.c_str(), "%d:%d:%d%n", &h, &mi, &s, &consumed);
    if (n < 3) {
        s = 0;
        n = std::sscanf(text.c_str(), "%d:%d%n", &h, &mi, &consumed);
        if (n == 2) n = 3;
    }
    if (n < 3 || consumed != static_cast<int>(text.size()) || h < 0 || h > 24 || mi < 0 ||
        mi > 59 || s < 0 || s > 59 || (h == 24 && (mi != 0 || s != 0)))
        throw std::invalid_argument("malformed time of day: " + text);
    return h * 60.0 + mi + s / 60.0;
}

inline std::int64_t day_start(std::int64_t t) {
    std::int64_t d = t / kSecondsPerDay;
    if (t % kSecondsPerDay < 0) --d;
    return d * kSecondsPerDay;
}

// ---------------------------------------------------------------------------
// Interval algebra
// ---------------------------------------------------------------------------

/// The 13 qualitative relations between two valid intervals.
enum class AllenRelation {
    Before,
    Meets,
    Overlaps,
    Starts,
    During,
    Finishes,
    Equals,
    After,
    MetBy,
    OverlappedBy,
    StartedBy,
    Contains,
    FinishedBy,
};

inline const char* to_string(AllenRelation r) {
    switch (r) {
        case AllenRelation::Before: return "before";
        case AllenRelation::Meets: return "meets";
        case AllenRelation::Overlaps: return "overlaps";
        case AllenRelation::Starts: return "starts";
        case AllenRelation::During: return "during";
        case AllenRelation::Finishes: return "finishes";
        case AllenRelation::Equals: return "equals";
        case AllenRelation::After: return "after";
        case AllenRelation::MetBy: return "met-by";
        case AllenRelation::OverlappedBy: return "overlapped-by";
        case AllenRelation::StartedBy: return "started-by";
        case AllenRelation::Contains: return "contains";
        case AllenRelation::FinishedBy: return "finished-by";
    }
    return "?";
}

inline AllenRelation inverse(AllenRelation r) {
    switch (r) {
        case AllenRelation::Before: return AllenRelation::After;
        case AllenRelation::Meets: return AllenRelation::MetBy;
        case AllenRelation::Overlaps: return AllenRelation::OverlappedBy;
        case AllenRelation::Starts: return AllenRelation::StartedBy;
        case AllenRelation::During: return AllenRelation::Contains;
        case AllenRelation::Finishes: return AllenRelation::FinishedBy;
        case AllenRelation::Equals: return AllenRelation::Equals;
        case AllenRelation::After: return AllenRelation::Before;
        case AllenRelation::MetBy: return AllenRelation::Meets;
        case AllenRelation::OverlappedBy: return AllenRelation::Overlaps;
        case AllenRelation::StartedBy: return AllenRelation::Starts;
        case AllenRelation::Contains: return AllenRelation::During;
        case AllenRelation::FinishedBy: return AllenRelation::Finishes;
    }
    return AllenRelation::Equals;
}

/// Half-open-free interval over an ordered scalar; start < end enforced.
/// Instantiated as TimeInterval (absolute seconds) and MinuteWindow
/// (minute-of-day); the algebra below works on either.
template <class Rep>
class BasicInterval {
public:
    BasicInterval(Rep start, Rep end) : start_(start), end_(end) {
        if (!(start < end))
            throw std::invalid_argument("interval start must precede end");
    }

    Rep start() const { return start_; }
    Rep end() const { return end_; }
    Rep duration() const { return end_ - start_; }

    friend bool operator==(const BasicInterval& a, const BasicInterval& b) {
        return a.start_ == b.start_ && a.end_ == b.end_;
    }

private:
    Rep start_;
    Rep end_;
};

/// Unique Allen relation of a with respect to b.
template <class Rep>
AllenRelation allen_relation(const BasicInterval<Rep>& a, const BasicInterval<Rep>& b) {
    if (a.end() < b.start()) return AllenRelation::Before;
    if (a.end() == b.start()) return AllenRelation::Meets;
    if (b.end() < a.start()) return AllenRelation::After;
    if (b.end() == a.start()) return AllenRelation::MetBy;
    // Intervals share interior points from here on.
    if (a.start() == b.start()) {
        if (a.end() == b.end()) return AllenRelation::Equals;
        return a.end() < b.end() ? AllenRelation::Starts : AllenRelation::StartedBy;
    }
    if (a.end() == b.end())
        return a.start() > b.start() ? AllenRelation::Finishes : AllenRelation::FinishedBy;
    if (a.start() > b.start())
        return a.end() < b.end() ? AllenRelation::During : AllenRelation::OverlappedBy;
    return a.end() > b.end() ? AllenRelation::Contains : AllenRelation::Overlaps;
}

/// [max(starts), min(ends)] when that is a valid interval, otherwise empty.
/// A shared boundary point (meets) counts as empty.
template <class Rep>
std::optional<BasicInterval<Rep>> temporal_intersection(const BasicInterval<Rep>& a,
                                                        const BasicInterval<Rep>& b) {
    const Rep s = std::max(a.start(), b.start());
    const Rep e = std::min(a.end(), b.end());
    if (s < e) return BasicInterval<Rep>(s, e);
    return std::nullopt;
}

/// True for the nine relations with a non-empty intersection.
inline bool is_overlapping(AllenRelation r) {
    switch (r) {
        case AllenRelation::Before:
        case AllenRelation::After:
        case AllenRelation::Meets:
        case AllenRelation::MetBy:
            return false;
        default:
            return true;
    }
}

/// Absolute event time span at second resolution. Must not wrap midnight:
/// a usage crossing midnight is split at the day boundary during ingestion.
class TimeInterval : public BasicInterval<std::int64_t> {
public:
    TimeInterval(std::int64_t start, std::int64_t end) : BasicInterval(start, end) {
        if (end > day_start(start) + kSecondsPerDay)
            throw std::invalid_argument("interval crosses midnight; split it first");
    }
};

/// Daily-periodic habit window in minute-of-day, within [0, 1440].
class MinuteWindow : public BasicInterval<double> {
public:
    MinuteWindow(double start, double end) : BasicInterval(start, end) {
        if (start < 0.0 || end > kMinutesPerDay)
            throw std::invalid_argument("minute window outside 00:00-24:00");
    }
};

// ---------------------------------------------------------------------------
// Services and events
// ---------------------------------------------------------------------------

/// What a service offers: functional attributes plus QoS attributes.
struct ServiceDescriptor {
    std::string service_id;
    std::string service_name;
    std::set<std::string> functions;
    std::set<std::string> qos_attributes;
};

inline void validate(const ServiceDescriptor& d) {
    if (d.service_id.empty()) throw std::invalid_argument("service_id must be non-empty");
    if (d.functions.empty())
        throw std::invalid_argument("service " + d.service_id + " declares no functions");
    for (const auto& n : d.functions)
        if (n.empty()) throw std::invalid_argument("empty function name");
    for (const auto& n : d.qos_attributes)
        if (n.empty()) throw std::invalid_argument("empty QoS attribute name");
}

/// One timestamped manifestation of a service by one user at one location.
/// Attribute values are kept as strings; numeric attributes are recognized
/// and binned during preprocessing.
struct ServiceEvent {
    std::string service_id;
    std::map<std::string, std::string> attribute_values;
    TimeInterval interval;
    std::string location;
    std::string user_id;

    double start_minute() const {
        return static_cast<double>(interval.start() - day_start(interval.start())) / 60.0;
    }
    double end_minute() const {
        const double m =
            static_cast<double>(interval.end() - day_start(interval.start())) / 60.0;
        return m;  // 1440 when the event ends exactly at the next midnight
    }
};

/// Chronological event order with a deterministic tie-break.
inline bool event_order(const ServiceEvent& a, const ServiceEvent& b) {
    if (a.interval.start() != b.interval.start())
        return a.interval.start() < b.interval.start();
    if (a.service_id != b.service_id) return a.service_id < b.service_id;
    return a.user_id < b.user_id;
}

/// Set of known services; ids are unique within a catalog.
class ServiceCatalog {
public:
    void add(ServiceDescriptor descriptor) {
        validate(descriptor);
        auto [it, inserted] = services_.emplace(descriptor.service_id, std::move(descriptor));
        if (!inserted)
            throw std::invalid_argument("duplicate service_id: " + it->first);
    }

    bool contains(const std::string& service_id) const {
        return services_.count(service_id) != 0;
    }

    const ServiceDescriptor& at(const std::string& service_id) const {
        auto it = services_.find(service_id);
        if (it == services_.end())
            throw std::invalid_argument("unknown service_id: " + service_id);
        return it->second;
    }

    /// Event refers to a known service and only to declared attributes.
    void validate_event(const ServiceEvent& event) const {
        const ServiceDescriptor& d = at(event.service_id);
        for (const auto& [name, value] : event.attribute_values) {
            if (!d.functions.count(name) && !d.qos_attributes.count(name))
                throw std::invalid_argument("event attribute '" + name +
                                            "' not declared by service " + event.service_id);
        }
    }

    const std::map<std::string, ServiceDescriptor>& services() const { return services_; }

private:
    std::map<std::string, ServiceDescriptor> services_;
};

}  // namespace conflictlens
