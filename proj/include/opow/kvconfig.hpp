#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace opow {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text `key = value` configuration. `#` starts a comment. Keys listed as
// repeatable may appear several times; every other key at most once.
class KvConfig {
public:
    KvConfig() = default;

    static KvConfig parse(std::istream& in);
    static KvConfig parse(std::string_view text);
    static KvConfig load(const std::string& path);

    void set(std::string key, std::string value);

    // Throws ConfigError naming the first key not in `allowed`, or a
    // non-repeatable key given twice.
    void require_known(const std::vector<std::string_view>& allowed,
                       const std::vector<std::string_view>& repeatable = {}) const;

    bool has(std::string_view key) const;
    std::optional<std::string> get(std::string_view key) const;
    std::vector<std::string> get_all(std::string_view key) const;

    std::string get_string(std::string_view key, std::string fallback) const;
    double get_double(std::string_view key, double fallback) const;
    std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    std::vector<double> get_doubles(std::string_view key, std::vector<double> fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }
    nlohmann::json to_json() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

double parse_double(std::string_view key, std::string_view text);
std::uint64_t parse_u64(std::string_view key, std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view s);

}  // namespace opow
