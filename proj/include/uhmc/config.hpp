#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uhmc {

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaEntry {
    const char* key;
    const char* type;  // "int", "u64", "double", "string", "int_list"
    const char* fallback;  // empty = required when read
    const char* description;
};

const std::vector<SchemaEntry>& config_schema();
std::string config_schema_text();

// Flat key = value text file; '#' starts a comment; unknown keys are errors.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    void set(const std::string& key, const std::string& value);  // CLI overrides
    bool has(const std::string& key) const;

    long get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::vector<long> get_int_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    const SchemaEntry& entry(const std::string& key) const;
    std::string raw(const std::string& key) const;  // value or schema fallback
    std::map<std::string, std::string> values_;
};

}  // namespace uhmc
