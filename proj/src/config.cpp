#include "filtnoise/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace filtnoise {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    Config cfg;
    cfg.parse(ss.str(), file.parent_path(), 0);
    return cfg;
}

Config Config::from_string(const std::string& text,
                           const std::filesystem::path& base_dir) {
    Config cfg;
    cfg.parse(text, base_dir, 0);
    return cfg;
}

void Config::parse(const std::string& text,
                   const std::filesystem::path& base_dir, int depth) {
    if (depth > 8) throw ConfigError("config include depth exceeds 8");
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "include") {
            const auto path = base_dir / value;
            std::ifstream inc(path);
            if (!inc)
                throw ConfigError("config include not found: " + path.string());
            std::stringstream ss;
            ss << inc.rdbuf();
            Config sub;
            sub.parse(ss.str(), path.parent_path(), depth + 1);
            // Included entries only fill gaps; the including file wins.
            for (const auto& [k, v] : sub.entries_) entries_.emplace(k, v);
            continue;
        }
        const std::string full = section.empty() ? key : section + "." + key;
        entries_[full] = value;
    }
}

std::string Config::require_string(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end())
        throw ConfigError("missing required config key: " + key);
    return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& dflt) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? dflt : it->second;
}

double Config::require_double(const std::string& key) const {
    const std::string v = require_string(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + v);
    }
}

double Config::get_double(const std::string& key, double dflt) const {
    return has(key) ? require_double(key) : dflt;
}

long Config::require_int(const std::string& key) const {
    const std::string v = require_string(key);
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config key " + key + " is not an integer: " + v);
    return out;
}

long Config::get_int(const std::string& key, long dflt) const {
    return has(key) ? require_int(key) : dflt;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t dflt) const {
    if (!has(key)) return dflt;
    const std::string v = require_string(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("config key " + key + " is not a u64: " + v);
    return out;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const std::string v = require_string(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key " + key + " is not a bool: " + v);
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    std::istringstream ss(require_string(key));
    std::string item;
    while (std::getline(ss, item, ';')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<Vec2i> Config::get_mode_list(const std::string& key) const {
    std::vector<Vec2i> out;
    for (const auto& item : get_list(key)) {
        const auto comma = item.find(',');
        if (comma == std::string::npos)
            throw ConfigError("config key " + key + ": expected kx,ky pairs");
        try {
            out.emplace_back(std::stoi(trim(item.substr(0, comma))),
                             std::stoi(trim(item.substr(comma + 1))));
        } catch (const std::exception&) {
            throw ConfigError("config key " + key + ": bad mode entry " + item);
        }
    }
    return out;
}

}  // namespace filtnoise
