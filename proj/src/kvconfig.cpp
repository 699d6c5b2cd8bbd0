#include "opow/kvconfig.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace opow {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!piece.empty()) out.push_back(std::move(piece));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

KvConfig KvConfig::parse(std::istream& in)
{
    KvConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        cfg.entries_.emplace_back(std::move(key), std::move(value));
    }
    return cfg;
}

KvConfig KvConfig::parse(std::string_view text)
{
    std::istringstream in{std::string(text)};
    return parse(in);
}

KvConfig KvConfig::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse(in);
}

void KvConfig::set(std::string key, std::string value)
{
    std::erase_if(entries_, [&](const auto& kv) { return kv.first == key; });
    entries_.emplace_back(std::move(key), std::move(value));
}

void KvConfig::require_known(const std::vector<std::string_view>& allowed,
                             const std::vector<std::string_view>& repeatable) const
{
    for (const auto& [key, value] : entries_) {
        const bool multi = std::find(repeatable.begin(), repeatable.end(), key) != repeatable.end();
        if (!multi && std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError("unknown config key '" + key + "'");
        if (!multi && std::count_if(entries_.begin(), entries_.end(), [&](const auto& kv) { return kv.first == key; }) > 1)
            throw ConfigError("config key '" + key + "' given more than once");
    }
}

bool KvConfig::has(std::string_view key) const
{
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& kv) { return kv.first == key; });
}

std::optional<std::string> KvConfig::get(std::string_view key) const
{
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

std::vector<std::string> KvConfig::get_all(std::string_view key) const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

double parse_double(std::string_view key, std::string_view text)
{
    const std::string s = trim(text);
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not a number");
    return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view text)
{
    const std::string s = trim(text);
    std::uint64_t v = 0;
    int base = 10;
    std::string_view digits = s;
    if (digits.starts_with("0x") || digits.starts_with("0X")) {
        base = 16;
        digits.remove_prefix(2);
    }
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
    if (ec != std::errc{} || p != digits.data() + digits.size() || digits.empty())
        throw ConfigError("config key '" + std::string(key) + "': '" + s + "' is not an unsigned integer");
    return v;
}

std::string KvConfig::get_string(std::string_view key, std::string fallback) const
{
    auto v = get(key);
    return v ? *v : fallback;
}

double KvConfig::get_double(std::string_view key, double fallback) const
{
    auto v = get(key);
    return v ? parse_double(key, *v) : fallback;
}

std::uint64_t KvConfig::get_u64(std::string_view key, std::uint64_t fallback) const
{
    auto v = get(key);
    return v ? parse_u64(key, *v) : fallback;
}

bool KvConfig::get_bool(std::string_view key, bool fallback) const
{
    auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config key '" + std::string(key) + "': '" + *v + "' is not a boolean");
}

std::vector<double> KvConfig::get_doubles(std::string_view key, std::vector<double> fallback) const
{
    auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    for (const auto& piece : split(*v, ',')) out.push_back(parse_double(key, piece));
    return out;
}

nlohmann::json KvConfig::to_json() const
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [k, v] : entries_) {
        if (j.contains(k)) {
            if (!j[k].is_array()) j[k] = nlohmann::json::array({j[k]});
            j[k].push_back(v);
        } else {
            j[k] = v;
        }
    }
    return j;
}

}  // namespace opow
