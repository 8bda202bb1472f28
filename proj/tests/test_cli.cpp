#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "filtnoise/io.hpp"
#include "filtnoise/noise.hpp"

using namespace filtnoise;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRunner {
    fs::path root;

    CliRunner() {
        const char* env = std::getenv("FILTNOISE_CLI");
        REQUIRE_MESSAGE(env != nullptr, "FILTNOISE_CLI must point at the binary");
        cli = env;
        root = fs::temp_directory_path() /
               ("filtnoise_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(root);
    }
    ~CliRunner() { fs::remove_all(root); }

    int run(const std::string& args) const {
        const std::string cmd = cli + " " + args + " >/dev/null 2>" +
                                (root / "stderr.txt").string();
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    }

    std::string stderr_text() const {
        std::ifstream in(root / "stderr.txt");
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path write_config(const std::string& name, const std::string& text) const {
        const fs::path p = root / name;
        std::ofstream out(p);
        out << text;
        return p;
    }

    std::string cli;
    static inline int counter = 0;
};

json read_json(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    json j;
    in >> j;
    return j;
}

}  // namespace

TEST_CASE("dns run: declared files exist and reruns are byte-identical") {
    CliRunner cli;
    const fs::path cfg = cli.write_config("dns.cfg",
                                          "[dns]\n"
                                          "n = 64\nnu = 2e-3\nalpha = 0.5\n"
                                          "dt = 2e-3\nseed = 42\n"
                                          "spin_up = 0.2\ncollect = 0.5\n"
                                          "[forcing]\nk_f = 10\nepsilon = 1\n"
                                          "[modes]\nlist = 10,0; 3,4\n");
    const fs::path out1 = cli.root / "run1";
    const fs::path out2 = cli.root / "run2";
    REQUIRE(cli.run("dns run --config " + cfg.string() + " --out " +
                    out1.string()) == 0);
    for (const char* f : {"spectrum.csv", "energy.csv", "mode_10_0.csv",
                          "mode_3_4.csv", "final.snap", "manifest.json"})
        CHECK(fs::exists(out1 / f));
    CHECK(verify_manifest(out1).empty());

    REQUIRE(cli.run("dns run --config " + cfg.string() + " --out " +
                    out2.string()) == 0);
    for (const char* f : {"spectrum.csv", "energy.csv", "mode_10_0.csv", "final.snap"})
        CHECK(file_digest(out1 / f) == file_digest(out2 / f));
}

TEST_CASE("dns run: config validation failures exit with code 2") {
    CliRunner cli;
    const fs::path cfg = cli.write_config(
        "bad.cfg", "[dns]\nn = 102\ncollect = 0.1\n[forcing]\nk_f = 10\n");
    CHECK(cli.run("dns run --config " + cfg.string() + " --out " +
                  (cli.root / "x").string()) == 2);
    CHECK(cli.run("dns run --config " + (cli.root / "missing.cfg").string() +
                  " --out " + (cli.root / "x").string()) == 2);
}

TEST_CASE("modes extract reads snapshots back") {
    CliRunner cli;
    const fs::path cfg = cli.write_config("dns.cfg",
                                          "[dns]\n"
                                          "n = 64\nnu = 2e-3\nalpha = 0.5\n"
                                          "dt = 2e-3\nseed = 1\n"
                                          "spin_up = 0\ncollect = 0.1\n"
                                          "[forcing]\nk_f = 10\n");
    const fs::path run = cli.root / "run";
    REQUIRE(cli.run("dns run --config " + cfg.string() + " --out " +
                    run.string()) == 0);
    const fs::path ecfg = cli.write_config(
        "ext.cfg", "[extract]\nsnapshots = " + (run / "final.snap").string() +
                       "\nmodes = 10,0; 1,1\n");
    const fs::path out = cli.root / "ext";
    REQUIRE(cli.run("modes extract --config " + ecfg.string() + " --out " +
                    out.string()) == 0);
    CHECK(fs::exists(out / "extracted_10_0.csv"));
    const CsvTable t = read_csv(out / "extracted_10_0.csv");
    CHECK(t.rows() == 1);
    CHECK(verify_manifest(out).empty());
}

TEST_CASE("diag run: gaussian-kernel paths self-identify as beta = inf") {
    CliRunner cli;
    for (int i = 0; i < 2; ++i) {
        FilteredNoiseSpec spec;
        spec.kernel = gaussian_kernel();
        spec.tau = 1.0;
        spec.dt = 0.02;
        spec.horizon = 2000.0;
        spec.seed = 100 + i;
        const SamplePath p = simulate_path(spec);
        write_csv(cli.root / ("path" + std::to_string(i) + ".csv"),
                  {{"t", "value"}, {p.times, p.values}});
    }
    const fs::path cfg = cli.write_config(
        "diag.cfg", "[diag]\ninputs = " + (cli.root / "path0.csv").string() +
                        "; " + (cli.root / "path1.csv").string() +
                        "\nmax_lag = 5.0\n");
    const fs::path out = cli.root / "diag";
    REQUIRE(cli.run("diag run --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    for (const char* f :
         {"diag_path0.json", "diag_path1.json", "collapse.csv",
          "cross_correlation.csv", "series_index.json", "manifest.json"})
        CHECK(fs::exists(out / f));
    const json d = read_json(out / "diag_path0.json");
    CHECK(d.at("beta_star") == "inf");
    CHECK(d.at("tau").get<double>() == doctest::Approx(1.0).epsilon(0.08));
    CHECK(verify_manifest(out).empty());

    // empty input list: warning, exit 0
    const fs::path empty = cli.write_config("empty.cfg", "[diag]\n");
    CHECK(cli.run("diag run --config " + empty.string() + " --out " +
                  (cli.root / "d2").string()) == 0);

    // corrupted CSV: parse error naming the line, exit 4
    {
        std::ofstream bad(cli.root / "bad.csv");
        bad << "t,value\n0,1\n0.1,oops\n";
    }
    const fs::path badcfg = cli.write_config(
        "bad.cfg", "[diag]\ninputs = " + (cli.root / "bad.csv").string() + "\n");
    CHECK(cli.run("diag run --config " + badcfg.string() + " --out " +
                  (cli.root / "d3").string()) == 4);
    CHECK(cli.stderr_text().find(":3:") != std::string::npos);

    // missing input: exit 4 naming the file
    const fs::path misscfg = cli.write_config(
        "miss.cfg",
        "[diag]\ninputs = " + (cli.root / "nosuch.csv").string() + "\n");
    CHECK(cli.run("diag run --config " + misscfg.string() + " --out " +
                  (cli.root / "d4").string()) == 4);
    CHECK(cli.stderr_text().find("nosuch.csv") != std::string::npos);
}

TEST_CASE("synth build and tracer disperse in the white-noise field") {
    CliRunner cli;
    const fs::path scfg = cli.write_config("synth.cfg",
                                           "[synth]\nkernel = gaussian\n"
                                           "tau = 0.02\ne_kmax = 1.0\n"
                                           "k_max = 8\nseed = 7\n");
    const fs::path sdir = cli.root / "synth";
    REQUIRE(cli.run("synth build --config " + scfg.string() + " --out " +
                    sdir.string()) == 0);
    CHECK(fs::exists(sdir / "field.json"));
    const json f = read_json(sdir / "field.json");
    CHECK(f.at("amplitude").get<double>() > 0.0);

    const fs::path tcfg = cli.write_config(
        "tracer.cfg", "[tracer]\nfield = white:" + (sdir / "field.json").string() +
                          "\nm = 4000\ndt = 4e-4\nhorizon = 1.1\n"
                          "blocks = 40\nseed = 3\n"
                          "[bands]\nslope_long = 0.9,1.1\n");
    const fs::path tdir = cli.root / "disp";
    REQUIRE(cli.run("tracer disperse --config " + tcfg.string() + " --out " +
                    tdir.string()) == 0);
    CHECK(fs::exists(tdir / "dispersion.csv"));
    CHECK(fs::exists(tdir / "prediction.csv"));
    const json rep = read_json(tdir / "regime.json");
    const double slope_long = rep.at("slope_long").get<double>();
    CHECK(slope_long > 0.9);
    CHECK(slope_long < 1.1);
    CHECK(rep.at("bands").at("bands.slope_long").at("pass").get<bool>());
    CHECK(verify_manifest(tdir).empty());
}

TEST_CASE("tracer disperse: constant field is flagged ballistic") {
    CliRunner cli;
    const fs::path cfg = cli.write_config("c.cfg",
                                          "[tracer]\nfield = constant:1,0\n"
                                          "m = 8\ndt = 1e-3\nhorizon = 6.0\n"
                                          "tau = 0.1\nblocks = 2\n");
    const fs::path out = cli.root / "c";
    REQUIRE(cli.run("tracer disperse --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    const json rep = read_json(out / "regime.json");
    CHECK(rep.at("slope_short").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.at("slope_long").get<double>() == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(rep.at("ballistic_only").get<bool>());

    // missing tau for a constant field is a config error
    const fs::path cfg2 = cli.write_config("c2.cfg",
                                           "[tracer]\nfield = constant:1,0\n"
                                           "m = 8\ndt = 1e-3\nhorizon = 2.0\n");
    CHECK(cli.run("tracer disperse --config " + cfg2.string() + " --out " +
                  (cli.root / "c2").string()) == 2);

    // span too short: nonzero exit mentioning the required span
    const fs::path cfg3 = cli.write_config("c3.cfg",
                                           "[tracer]\nfield = constant:1,0\n"
                                           "m = 8\ndt = 1e-3\nhorizon = 0.1\n"
                                           "tau = 0.02\n");
    CHECK(cli.run("tracer disperse --config " + cfg3.string() + " --out " +
                  (cli.root / "c3").string()) != 0);
    CHECK(cli.stderr_text().find("required span") != std::string::npos);
}

TEST_CASE("tracer predict emits the two-regime curve") {
    CliRunner cli;
    const fs::path cfg = cli.write_config("p.cfg",
                                          "[predict]\nkernel = gaussian\n"
                                          "tau = 0.1\nenergy = 2.0\n");
    const fs::path out = cli.root / "p";
    REQUIRE(cli.run("tracer predict --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    const CsvTable t = read_csv(out / "prediction.csv");
    const ArrayXd& tt = t.column("t");
    const ArrayXd& v = t.column("var_x");
    CHECK(v[0] == 0.0);
    // late-time slope ~ tau E / 2 = 0.1
    const double slope = (v[v.size() - 1] - v[v.size() - 2]) /
                         (tt[tt.size() - 1] - tt[tt.size() - 2]);
    CHECK(slope == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("report collapse combines diag records") {
    CliRunner cli;
    FilteredNoiseSpec spec;
    spec.kernel = gaussian_kernel();
    spec.tau = 0.5;
    spec.dt = 0.01;
    spec.horizon = 500.0;
    spec.seed = 9;
    const SamplePath p = simulate_path(spec);
    write_csv(cli.root / "m.csv", {{"t", "value"}, {p.times, p.values}});
    const fs::path dcfg = cli.write_config(
        "d.cfg",
        "[diag]\ninputs = " + (cli.root / "m.csv").string() + "\nmax_lag = 2\n");
    REQUIRE(cli.run("diag run --config " + dcfg.string() + " --out " +
                    (cli.root / "d").string()) == 0);
    const fs::path rcfg = cli.write_config(
        "r.cfg", "[report]\ninputs = " +
                     (cli.root / "d" / "diag_m.json").string() + "\n");
    const fs::path out = cli.root / "rep";
    REQUIRE(cli.run("report collapse --config " + rcfg.string() + " --out " +
                    out.string()) == 0);
    const CsvTable t = read_csv(out / "collapse.csv");
    CHECK(t.rows() > 10);
    // rescaled lags should reach past one relaxation time
    CHECK(t.column("lag_over_tau").maxCoeff() > 1.0);
    CHECK(verify_manifest(out).empty());
}

TEST_CASE("custom kernel csv feeds synth build") {
    CliRunner cli;
    // triangular density on [-1, 1]
    const int n = 201;
    ArrayXd x(n), d(n);
    for (int i = 0; i < n; ++i) {
        x[i] = -1.0 + 2.0 * i / (n - 1);
        d[i] = 1.0 - std::abs(x[i]);
    }
    write_csv(cli.root / "tri.csv", {{"x", "density"}, {x, d}});
    const fs::path cfg = cli.write_config(
        "s.cfg", "[synth]\nkernel = custom:" + (cli.root / "tri.csv").string() +
                     "\ntau = 0.1\ne_kmax = 1\nk_max = 6\nseed = 1\n");
    const fs::path out = cli.root / "s";
    REQUIRE(cli.run("synth build --config " + cfg.string() + " --out " +
                    out.string()) == 0);
    const json f = read_json(out / "field.json");
    CHECK(f.at("kernel").at("label") == "custom");
}
