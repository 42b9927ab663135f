#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgmc {

// Configuration / CLI errors map to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

// Plain-text key=value configuration with [section] headers. Entries keep
// their raw textual values and source lines, so parse -> serialize -> parse
// is the identity and error messages can point at the offending line.
class Config {
  public:
    static Config parse_string(const std::string& text,
                               const std::string& source_name = "<string>");
    static Config parse_file(const std::string& path);

    std::string serialize() const;
    const std::vector<ConfigEntry>& entries() const { return entries_; }
    const std::string& source_name() const { return source_name_; }

    bool has(const std::string& section, const std::string& key) const;
    void set(const std::string& section, const std::string& key,
             const std::string& value);

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    std::string require_string(const std::string& section,
                               const std::string& key) const;
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const;
    double require_double(const std::string& section, const std::string& key) const;
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    std::vector<double> get_double_list(const std::string& section,
                                        const std::string& key) const;
    std::vector<int> get_int_list(const std::string& section,
                                  const std::string& key) const;

    // Rejects entries outside the allowed (section, key) pairs; pairs are
    // "section.key" strings.
    void check_allowed(const std::vector<std::string>& allowed) const;

    // FNV-1a hash of the serialized form, quoted in run manifests.
    std::uint64_t hash() const;

  private:
    std::vector<ConfigEntry> entries_;
    std::string source_name_;

    const ConfigEntry* find(const std::string& section,
                            const std::string& key) const;
    [[noreturn]] void fail(const ConfigEntry& entry, const std::string& msg) const;
};

}  // namespace mgmc
