#include "filtnoise/io.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace filtnoise {

using nlohmann::json;

const ArrayXd& CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return data[i];
    throw ParseError("csv: no column named " + name);
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << table.columns[c];
    out << "\n";
    char buf[32];
    for (long r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.data.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", table.data[c][r]);
            out << (c ? "," : "") << buf;
        }
        out << "\n";
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("missing input file: " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path.string() + ":1: empty file");
    CsvTable t;
    {
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.columns.push_back(cell);
    }
    std::vector<std::vector<double>> cols(t.columns.size());
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            if (c >= cols.size())
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": too many columns");
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end != cell.c_str() + cell.size() || cell.empty())
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": bad number '" + cell + "'");
            cols[c].push_back(v);
            ++c;
        }
        if (c != cols.size())
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(cols.size()) +
                             " columns, got " + std::to_string(c));
    }
    for (auto& v : cols)
        t.data.push_back(Eigen::Map<ArrayXd>(v.data(), static_cast<long>(v.size())));
    return t;
}

void write_snapshot(const std::filesystem::path& path, const VorticityState& s,
                    const SnapshotMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write("FNSNAP01", 8);
    const auto n = static_cast<std::uint32_t>(s.n());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&s.time), 8);
    out.write(reinterpret_cast<const char*>(&meta.nu), 8);
    out.write(reinterpret_cast<const char*>(&meta.alpha), 8);
    out.write(reinterpret_cast<const char*>(&meta.seed), 8);
    out.write(reinterpret_cast<const char*>(s.omega_hat.data()),
              static_cast<std::streamsize>(sizeof(Complex)) * s.n() * s.n());
}

VorticityState read_snapshot(const std::filesystem::path& path,
                             SnapshotMeta* meta) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("missing input file: " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "FNSNAP01", 8) != 0)
        throw ParseError(path.string() + ": not a filtnoise snapshot");
    std::uint32_t n = 0;
    VorticityState s;
    SnapshotMeta m;
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&s.time), 8);
    in.read(reinterpret_cast<char*>(&m.nu), 8);
    in.read(reinterpret_cast<char*>(&m.alpha), 8);
    in.read(reinterpret_cast<char*>(&m.seed), 8);
    if (!in || n == 0 || n > 1 << 16)
        throw ParseError(path.string() + ": corrupt snapshot header");
    s.omega_hat.resize(n, n);
    in.read(reinterpret_cast<char*>(s.omega_hat.data()),
            static_cast<std::streamsize>(sizeof(Complex)) * n * n);
    if (!in) throw ParseError(path.string() + ": truncated snapshot");
    if (meta) *meta = m;
    return s;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInputError("missing input file: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const auto got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

void Manifest::add_output(const std::filesystem::path& dir,
                          const std::filesystem::path& rel) {
    outputs[rel.string()] = file_digest(dir / rel);
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    json j;
    j["command"] = m.command;
    j["code_version"] = m.code_version;
    j["created_utc"] = m.created_utc;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";
}

Manifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw MissingInputError("missing manifest: " +
                                (dir / "manifest.json").string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("manifest.json: " + std::string(e.what()));
    }
    Manifest m;
    m.command = j.value("command", "");
    m.code_version = j.value("code_version", "");
    m.created_utc = j.value("created_utc", "");
    const json cfg = j.value("config", json::object());
    const json ins = j.value("inputs", json::object());
    const json outs = j.value("outputs", json::object());
    for (const auto& [k, v] : cfg.items()) m.config[k] = v.get<std::string>();
    for (const auto& [k, v] : ins.items()) m.inputs[k] = v.get<std::string>();
    for (const auto& [k, v] : outs.items()) m.outputs[k] = v.get<std::string>();
    return m;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
    const Manifest m = read_manifest(dir);
    std::vector<std::string> bad;
    for (const auto& [rel, digest] : m.outputs) {
        try {
            if (file_digest(dir / rel) != digest) bad.push_back(rel);
        } catch (const std::exception&) {
            bad.push_back(rel);
        }
    }
    return bad;
}

}  // namespace filtnoise
