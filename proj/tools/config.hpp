// Copyright photoncorr contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "photoncorr/errors.hpp"

namespace photoncorr::cli {

/// Strict accessor over a JSON object: typed lookups with range checks, and
/// finish() rejects keys nothing consumed, so config typos fail loudly.
class ConfigView {
  public:
    ConfigView(const nlohmann::json& j, std::string context)
        : j_(j), context_(std::move(context)) {
        if (!j_.is_object()) throw config_error(context_ + ": expected a JSON object");
    }

    double number(const std::string& key) {
        require(key);
        return as_number(key);
    }
    double number_or(const std::string& key, double fallback) {
        if (!j_.contains(key)) return fallback;
        return as_number(key);
    }
    std::int64_t integer(const std::string& key) {
        require(key);
        return as_integer(key);
    }
    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        if (!j_.contains(key)) return fallback;
        return as_integer(key);
    }
    std::string str(const std::string& key) {
        require(key);
        return as_string(key);
    }
    std::string str_or(const std::string& key, const std::string& fallback) {
        if (!j_.contains(key)) return fallback;
        return as_string(key);
    }
    bool flag_or(const std::string& key, bool fallback) {
        if (!j_.contains(key)) return fallback;
        seen_.insert(key);
        if (!j_.at(key).is_boolean()) throw config_error(context_ + "." + key + ": expected a boolean");
        return j_.at(key).get<bool>();
    }
    std::optional<std::vector<double>> number_list(const std::string& key) {
        if (!j_.contains(key)) return std::nullopt;
        seen_.insert(key);
        const auto& v = j_.at(key);
        if (!v.is_array()) throw config_error(context_ + "." + key + ": expected an array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw config_error(context_ + "." + key + ": expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    std::optional<nlohmann::json> object(const std::string& key) {
        if (!j_.contains(key)) return std::nullopt;
        seen_.insert(key);
        return j_.at(key);
    }
    bool has(const std::string& key) const { return j_.contains(key); }

    /// Rejects unconsumed keys.
    void finish() const {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key))
                throw config_error(context_ + ": unknown key '" + key + "'");
    }

  private:
    void require(const std::string& key) {
        if (!j_.contains(key)) throw config_error(context_ + ": missing key '" + key + "'");
    }
    double as_number(const std::string& key) {
        seen_.insert(key);
        if (!j_.at(key).is_number())
            throw config_error(context_ + "." + key + ": expected a number");
        return j_.at(key).get<double>();
    }
    std::int64_t as_integer(const std::string& key) {
        seen_.insert(key);
        if (!j_.at(key).is_number_integer())
            throw config_error(context_ + "." + key + ": expected an integer");
        return j_.at(key).get<std::int64_t>();
    }
    std::string as_string(const std::string& key) {
        seen_.insert(key);
        if (!j_.at(key).is_string())
            throw config_error(context_ + "." + key + ": expected a string");
        return j_.at(key).get<std::string>();
    }

    const nlohmann::json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

/// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::string config_hash(const nlohmann::json& config) {
    const std::string bytes = config.dump();
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace photoncorr::cli
