#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "filtnoise/common.hpp"
#include "filtnoise/nse2d.hpp"

namespace filtnoise {

inline constexpr const char* kCodeVersion = "filtnoise 0.1.0";

struct MissingInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Column-oriented numeric table; all CSVs use a header row, dot decimals
/// and "%.17g" formatting (locale-independent, round-trip exact).
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<ArrayXd> data;

    const ArrayXd& column(const std::string& name) const;
    long rows() const { return data.empty() ? 0 : data.front().size(); }
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Binary vorticity snapshot:
///   bytes 0-7   magic "FNSNAP01"
///   bytes 8-11  u32 N (little endian)
///   bytes 12-35 f64 time, nu, alpha
///   bytes 36-43 u64 seed
///   then N*N complex<f64> coefficients, column-major (kx index fastest).
struct SnapshotMeta {
    double nu = 0.0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
};

void write_snapshot(const std::filesystem::path& path, const VorticityState& s,
                    const SnapshotMeta& meta);
VorticityState read_snapshot(const std::filesystem::path& path,
                             SnapshotMeta* meta = nullptr);

/// FNV-1a 64-bit digest of a file, as 16 hex characters.
std::string file_digest(const std::filesystem::path& path);

struct Manifest {
    std::string command;
    std::string code_version = kCodeVersion;
    std::string created_utc;
    std::map<std::string, std::string> config;
    std::map<std::string, std::string> inputs;   // path -> digest
    std::map<std::string, std::string> outputs;  // path -> digest

    void add_output(const std::filesystem::path& dir,
                    const std::filesystem::path& rel);
};

void write_manifest(const std::filesystem::path& dir, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& dir);
/// Recomputes all digests; returns the paths that fail to verify.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace filtnoise
