#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "conflictlens/core.hpp"

namespace conflictlens {

// ---------------------------------------------------------------------------
// Plain-text event log ingestion. Line grammar, fields separated by one or
// more spaces; '#' begins a comment line:
//
//   <YYYY-MM-DD> <HH:MM:SS> <sensor> ON  [value|-] [user]
//   <YYYY-MM-DD> <HH:MM:SS> <sensor> OFF [-]       [user]
//   <YYYY-MM-DD> <HH:MM:SS> <sensor> <value>       [user]
//
// ON/OFF bracket a usage interval. A bare value line is a setting change: it
// closes the sensor's open interval and opens a new one carrying the value.
// A value token of the form name=value names the attribute; a bare token is
// recorded under the attribute "value". Events closing with no attributes get
// "state"="on" so usage-only sensors stay minable. A sensor token of the form
// location.name places the sensor in a room; a plain token doubles as its own
// location.
// ---------------------------------------------------------------------------

/// One tokenized log line.
struct RawLogRecord {
    std::string date;
    std::string time;
    std::string sensor;
    std::string status;  // ON, OFF or a value string
    std::string value;
    std::string user;
    std::size_t line_number = 0;
};

struct ParseOptions {
    std::string default_user = "R0";            // single-resident files carry one id
    std::int64_t max_event_seconds = 4 * 3600;  // cap for unclosed ON events
};

struct ParseAnomaly {
    std::size_t line_number;  // 0 for end-of-file anomalies
    std::string message;
};

struct ParseResult {
    std::vector<ServiceEvent> events;
    ServiceCatalog catalog;
    std::vector<ParseAnomaly> anomalies;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

inline void set_attribute(std::map<std::string, std::string>& attrs,
                          const std::string& token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos)
        attrs["value"] = token;
    else
        attrs[token.substr(0, eq)] = token.substr(eq + 1);
}

/// Pending interval opened by an ON or value line.
struct OpenEvent {
    std::int64_t since = 0;
    std::string service_id;
    std::string location;
    std::string user_id;
    std::map<std::string, std::string> attribute_values;
};

/// Splits [start, end) at midnight boundaries into day-contained events.
inline void append_split(std::vector<ServiceEvent>& out, const OpenEvent& o,
                         std::int64_t start, std::int64_t end) {
    while (start < end) {
        const std::int64_t boundary = day_start(start) + kSecondsPerDay;
        const std::int64_t piece_end = std::min(end, boundary);
        out.push_back(ServiceEvent{o.service_id, o.attribute_values,
                                   TimeInterval(start, piece_end), o.location, o.user_id});
        start = piece_end;
    }
}

}  // namespace detail

/// Parses a whole log into events. ON/OFF pairs become events; unmatched OFF
/// records are skipped and reported; unmatched ON records are closed at the
/// configured cap and flagged; malformed lines are collected, never silently
/// dropped. Events crossing midnight are split at the day boundary.
inline ParseResult parse_log(const std::string& text, const ParseOptions& options = {}) {
    ParseResult result;
    std::map<std::pair<std::string, std::string>, detail::OpenEvent> open;  // (sensor, user)

    auto close_open = [&](detail::OpenEvent& o, std::int64_t at, std::size_t line_no) {
        if (at <= o.since) {
            result.anomalies.push_back(
                {line_no, "zero-duration event for " + o.service_id + " dropped"});
            return;
        }
        if (o.attribute_values.empty()) o.attribute_values["state"] = "on";
        detail::append_split(result.events, o, o.since, at);
    };

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        const std::vector<std::string> tokens = detail::split_ws(line);
        if (tokens.size() < 4 || tokens.size() > 6) {
            result.anomalies.push_back({line_no, "malformed line: " + line});
            continue;
        }

        RawLogRecord rec;
        rec.line_number = line_no;
        rec.date = tokens[0];
        rec.time = tokens[1];
        rec.sensor = tokens[2];
        rec.status = tokens[3];
        const bool lifecycle = rec.status == "ON" || rec.status == "OFF";
        if (lifecycle) {
            if (tokens.size() > 4) rec.value = tokens[4];
            if (tokens.size() > 5) rec.user = tokens[5];
        } else {
            if (tokens.size() > 5) {
                result.anomalies.push_back({line_no, "malformed line: " + line});
                continue;
            }
            if (tokens.size() > 4) rec.user = tokens[4];
        }

        std::int64_t at = 0;
        try {
            at = parse_timestamp(rec.date + " " + rec.time);
        } catch (const std::exception& e) {
            result.anomalies.push_back({line_no, e.what()});
            continue;
        }

        const std::string user = rec.user.empty() ? options.default_user : rec.user;
        const std::pair<std::string, std::string> key{rec.sensor, user};
        auto it = open.find(key);

        if (rec.status == "OFF") {
            if (it == open.end()) {
                result.anomalies.push_back(
                    {line_no, "OFF with no prior ON for " + rec.sensor + ", skipped"});
                continue;
            }
            close_open(it->second, at, line_no);
            open.erase(it);
            continue;
        }

        // ON or a setting change: both open a fresh interval.
        if (it != open.end()) {
            if (rec.status == "ON")
                result.anomalies.push_back(
                    {line_no, "duplicate ON for " + rec.sensor + ", prior event restarted"});
            close_open(it->second, at, line_no);
            open.erase(it);
        }

        detail::OpenEvent o;
        o.since = at;
        const auto dot = rec.sensor.find('.');
        if (dot == std::string::npos || dot == 0 || dot + 1 == rec.sensor.size()) {
            o.service_id = rec.sensor;
            o.location = rec.sensor;
        } else {
            o.location = rec.sensor.substr(0, dot);
            o.service_id = rec.sensor.substr(dot + 1);
        }
        o.user_id = user;
        if (!lifecycle) detail::set_attribute(o.attribute_values, rec.status);
        if (!rec.value.empty() && rec.value != "-")
            detail::set_attribute(o.attribute_values, rec.value);
        open.emplace(key, std::move(o));
    }

    for (auto& [key, o] : open) {
        result.anomalies.push_back(
            {0, "unclosed ON for " + key.first + " (user " + key.second + "), capped"});
        close_open(o, o.since + options.max_event_seconds, 0);
    }

    std::sort(result.events.begin(), result.events.end(), event_order);

    std::map<std::string, std::set<std::string>> observed;
    for (const auto& e : result.events)
        for (const auto& [name, value] : e.attribute_values)
            if (name != "state") observed[e.service_id].insert(name);
    for (const auto& e : result.events) {
        if (result.catalog.contains(e.service_id)) continue;
        ServiceDescriptor d;
        d.service_id = e.service_id;
        d.service_name = e.service_id;
        d.functions = {"state"};
        d.qos_attributes = observed[e.service_id];
        result.catalog.add(std::move(d));
    }
    return result;
}

/// Renders events back into the log grammar, one ON and one OFF line per
/// event. Only events with at most one attribute are representable; richer
/// events belong in the habit database.
inline std::string print_log(const std::vector<ServiceEvent>& events) {
    std::ostringstream out;
    for (const ServiceEvent& e : events) {
        if (e.attribute_values.size() > 1)
            throw std::invalid_argument(
                "print_log: multi-attribute events are not representable in the log grammar");
        std::string value = "-";
        if (!e.attribute_values.empty()) {
            const auto& [name, v] = *e.attribute_values.begin();
            value = name == "value" ? v : name + "=" + v;
        }
        const std::string sensor =
            e.location == e.service_id ? e.service_id : e.location + "." + e.service_id;
        out << format_timestamp(e.interval.start()) << ' ' << sensor << " ON " << value << ' '
            << e.user_id << '\n';
        out << format_timestamp(e.interval.end()) << ' ' << sensor << " OFF - " << e.user_id
            << '\n';
    }
    return out.str();
}

}  // namespace conflictlens
