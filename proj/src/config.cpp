#include "mgmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace mgmc {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    for (char ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
              ch == '-'))
            return false;
    return true;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : value) {
        if (ch == ',') {
            parts.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(trim(cur));
    return parts;
}

}  // namespace

Config Config::parse_string(const std::string& text,
                            const std::string& source_name) {
    Config cfg;
    cfg.source_name_ = source_name;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(stripped.substr(1, stripped.size() - 2));
            if (!valid_identifier(section))
                throw ConfigError(source_name + ":" + std::to_string(lineno) +
                                  ": invalid section name '" + section + "'");
            continue;
        }
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (!valid_identifier(key))
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": invalid key '" + key + "'");
        if (section.empty())
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": key '" + key + "' outside any [section]");
        if (cfg.find(section, key))
            throw ConfigError(source_name + ":" + std::to_string(lineno) +
                              ": duplicate key '" + section + "." + key + "'");
        cfg.entries_.push_back({section, key, value, lineno});
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_string(buf.str(), path);
}

std::string Config::serialize() const {
    std::ostringstream os;
    // sections in first-appearance order, keys in file order within each
    std::vector<std::string> sections;
    for (const auto& e : entries_)
        if (std::find(sections.begin(), sections.end(), e.section) ==
            sections.end())
            sections.push_back(e.section);
    for (const auto& s : sections) {
        os << "[" << s << "]\n";
        for (const auto& e : entries_)
            if (e.section == s) os << e.key << " = " << e.value << "\n";
    }
    return os.str();
}

const ConfigEntry* Config::find(const std::string& section,
                                const std::string& key) const {
    for (const auto& e : entries_)
        if (e.section == section && e.key == key) return &e;
    return nullptr;
}

void Config::fail(const ConfigEntry& entry, const std::string& msg) const {
    throw ConfigError(source_name_ + ":" + std::to_string(entry.line) + ": " +
                      entry.section + "." + entry.key + ": " + msg);
}

bool Config::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

void Config::set(const std::string& section, const std::string& key,
                 const std::string& value) {
    for (auto& e : entries_)
        if (e.section == section && e.key == key) {
            e.value = value;
            return;
        }
    entries_.push_back({section, key, value, 0});
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
    const ConfigEntry* e = find(section, key);
    return e ? e->value : fallback;
}

std::string Config::require_string(const std::string& section,
                                   const std::string& key) const {
    const ConfigEntry* e = find(section, key);
    if (!e)
        throw ConfigError(source_name_ + ": missing required key '" + section +
                          "." + key + "'");
    return e->value;
}

double Config::require_double(const std::string& section,
                              const std::string& key) const {
    const ConfigEntry* e = find(section, key);
    if (!e)
        throw ConfigError(source_name_ + ": missing required key '" + section +
                          "." + key + "'");
    try {
        std::size_t pos = 0;
        const double v = std::stod(e->value, &pos);
        if (pos != e->value.size()) fail(*e, "trailing characters in number");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(*e, "not a number: '" + e->value + "'");
    }
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
    return has(section, key) ? require_double(section, key) : fallback;
}

long long Config::get_int(const std::string& section, const std::string& key,
                          long long fallback) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return fallback;
    long long v = 0;
    const auto res =
        std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e->value.data() + e->value.size())
        fail(*e, "not an integer: '" + e->value + "'");
    return v;
}

std::uint64_t Config::get_u64(const std::string& section, const std::string& key,
                              std::uint64_t fallback) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return fallback;
    std::uint64_t v = 0;
    const auto res =
        std::from_chars(e->value.data(), e->value.data() + e->value.size(), v);
    if (res.ec != std::errc{} || res.ptr != e->value.data() + e->value.size())
        fail(*e, "not an unsigned integer: '" + e->value + "'");
    return v;
}

std::vector<double> Config::get_double_list(const std::string& section,
                                            const std::string& key) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return {};
    std::vector<double> out;
    for (const auto& part : split_list(e->value)) {
        if (part.empty()) fail(*e, "empty list element");
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(part, &pos));
            if (pos != part.size()) fail(*e, "bad list element '" + part + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            fail(*e, "bad list element '" + part + "'");
        }
    }
    return out;
}

std::vector<int> Config::get_int_list(const std::string& section,
                                      const std::string& key) const {
    const ConfigEntry* e = find(section, key);
    if (!e) return {};
    std::vector<int> out;
    for (const auto& part : split_list(e->value)) {
        int v = 0;
        const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size())
            fail(*e, "bad integer list element '" + part + "'");
        out.push_back(v);
    }
    return out;
}

void Config::check_allowed(const std::vector<std::string>& allowed) const {
    for (const auto& e : entries_) {
        const std::string full = e.section + "." + e.key;
        if (std::find(allowed.begin(), allowed.end(), full) == allowed.end())
            throw ConfigError(source_name_ + ":" + std::to_string(e.line) +
                              ": unknown key '" + full + "'");
    }
}

std::uint64_t Config::hash() const {
    const std::string text = serialize();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace mgmc
