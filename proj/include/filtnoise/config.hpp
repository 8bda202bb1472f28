#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "filtnoise/common.hpp"

namespace filtnoise {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat, sectioned key-value config ("[section]" headers, "key = value"
/// lines, '#' comments). An "include = path" entry pulls in another file
/// relative to the current one; entries of the including file win.
class Config {
public:
    static Config load(const std::filesystem::path& file);
    static Config from_string(const std::string& text,
                              const std::filesystem::path& base_dir = ".");

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string require_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& dflt) const;
    double require_double(const std::string& key) const;
    double get_double(const std::string& key, double dflt) const;
    long require_int(const std::string& key) const;
    long get_int(const std::string& key, long dflt) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const;
    bool get_bool(const std::string& key, bool dflt) const;

    /// "3,4; 9,9; 16,17" -> integer pairs.
    std::vector<Vec2i> get_mode_list(const std::string& key) const;
    /// Semicolon-separated strings.
    std::vector<std::string> get_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    void set(const std::string& key, const std::string& value) {
        entries_[key] = value;
    }

private:
    void parse(const std::string& text, const std::filesystem::path& base_dir,
               int depth);
    std::map<std::string, std::string> entries_;
};

}  // namespace filtnoise
