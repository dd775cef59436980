#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace conflictlens {

/// Flat key-value configuration: `key = value` lines, '#' comments. Flag
/// overrides are applied on top via set().
class Config {
public:
    Config() = default;

    static Config from_string(const std::string& text) {
        Config config;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string trimmed = trim(line);
            if (trimmed.empty() || trimmed[0] == '#') continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            if (key.empty())
                throw std::runtime_error("config line " + std::to_string(line_no) +
                                         ": empty key");
            config.values_[key] = trim(trimmed.substr(eq + 1));
        }
        return config;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    bool contains(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        char* end = nullptr;
        const double v = std::strtod(it->second.c_str(), &end);
        if (end != it->second.c_str() + it->second.size())
            throw std::runtime_error("config key " + key + ": '" + it->second +
                                     "' is not a number");
        return v;
    }

    std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        char* end = nullptr;
        const long long v = std::strtoll(it->second.c_str(), &end, 10);
        if (end != it->second.c_str() + it->second.size())
            throw std::runtime_error("config key " + key + ": '" + it->second +
                                     "' is not an integer");
        return v;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return {};
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace conflictlens
