#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slicewatch/types.hpp"

namespace slicewatch {

// Override or config-file key not present in the documented registry.
struct UnknownKeyError : ConfigError {
    using ConfigError::ConfigError;
};

struct ConfigKeyInfo {
    const char* name;
    const char* default_value;
    const char* help;
};

// Flat key=value configuration. Every key is registered with a default and a
// help line; the same registry backs `--help` and the README key table.
class Config {
public:
    Config();  // all defaults

    static Config from_file(const std::string& path);

    // Parses "key=value"; throws UnknownKeyError for unregistered keys.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long get_long(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_seed(const std::string& key) const;
    bool get_bool(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key) const;

    // Sorted "key = value" lines; the canonical form used for hashing and the
    // report's config echo.
    std::string canonical() const;
    std::string hash() const;  // FNV-1a of canonical(), hex

    const std::map<std::string, std::string>& values() const { return values_; }

    static const std::vector<ConfigKeyInfo>& known_keys();

private:
    std::map<std::string, std::string> values_;
};

}  // namespace slicewatch
