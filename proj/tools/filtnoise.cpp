// Batch front end: DNS runs, mode extraction, diagnostics, synthesis,
// dispersion and prediction, plot-ready report assembly.

#include <omp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "filtnoise/config.hpp"
#include "filtnoise/diagnostics.hpp"
#include "filtnoise/io.hpp"
#include "filtnoise/kernels.hpp"
#include "filtnoise/noise.hpp"
#include "filtnoise/nse2d.hpp"
#include "filtnoise/synthfield.hpp"
#include "filtnoise/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace filtnoise;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitMissingInput = 4;

struct CommandContext {
    Config cfg;
    fs::path out;
    std::uint64_t seed = 0;
    bool seed_overridden = false;
    std::vector<fs::path> written;  // removed again if the command fails

    std::uint64_t seed_for(const std::string& key) const {
        return seed_overridden ? seed : cfg.get_u64(key, seed);
    }

    fs::path target(const std::string& rel) {
        written.push_back(out / rel);
        return out / rel;
    }
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void finalize_manifest(CommandContext& ctx, const std::string& command,
                       const std::map<std::string, std::string>& inputs = {}) {
    Manifest m;
    m.command = command;
    m.created_utc = utc_now();
    m.config = ctx.cfg.entries();
    m.inputs = inputs;
    for (const auto& p : ctx.written)
        m.add_output(ctx.out, fs::relative(p, ctx.out));
    write_manifest(ctx.out, m);
}

Kernel parse_kernel(const std::string& spec) {
    if (spec == "gaussian") return gaussian_kernel();
    if (spec.rfind("matern:", 0) == 0) {
        const std::string b = spec.substr(7);
        if (b == "inf" || b == "infinity")
            return matern_kernel(std::numeric_limits<double>::infinity());
        try {
            return matern_kernel(std::stod(b));
        } catch (const std::domain_error&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bad matern smoothness: " + spec);
        }
    }
    if (spec.rfind("custom:", 0) == 0) {
        const fs::path path = spec.substr(7);
        const CsvTable t = read_csv(path);
        const ArrayXd x = t.column("x");
        const ArrayXd d = t.column("density");
        if (x.size() < 4) throw ConfigError("custom kernel needs >= 4 rows");
        auto xs = std::make_shared<ArrayXd>(x);
        auto ds = std::make_shared<ArrayXd>(d);
        const double support = std::max(std::abs(x[0]), x[x.size() - 1]);
        auto density = [xs, ds](double v) {
            v = std::abs(v);
            const auto n = xs->size();
            if (v >= (*xs)[n - 1]) return 0.0;
            long lo = 0, hi = n - 1;
            while (hi - lo > 1) {
                const long mid = (lo + hi) / 2;
                ((*xs)[mid] <= v ? lo : hi) = mid;
            }
            const double t0 = ((*xs)[hi] - v) / ((*xs)[hi] - (*xs)[lo]);
            return t0 * (*ds)[lo] + (1.0 - t0) * (*ds)[hi];
        };
        try {
            return kernel_from_density(density, support);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("custom kernel: ") + e.what());
        }
    }
    throw ConfigError("unknown kernel spec: " + spec +
                      " (expected gaussian | matern:<beta> | custom:<path>)");
}

json kernel_to_json(const Kernel& k) {
    return json{{"label", k.label},
                {"support_radius", k.support_radius},
                {"first_abs_moment", k.first_abs_moment}};
}

Eigen::Map<ArrayXd> as_array(std::vector<double>& v) {
    return {v.data(), static_cast<long>(v.size())};
}

// ---------------------------------------------------------------------------
// dns run

SolverConfig solver_config_from(const Config& cfg, std::uint64_t seed) {
    SolverConfig sc;
    sc.n = static_cast<int>(cfg.get_int("dns.n", 256));
    sc.nu = cfg.get_double("dns.nu", 1.5e-3);
    sc.alpha = cfg.get_double("dns.alpha", 2.0);
    sc.dt = cfg.get_double("dns.dt", 2e-3);
    sc.seed = seed;
    const std::string integ = cfg.get_string("dns.integrator", "rk3");
    if (integ == "rk3")
        sc.integrator = Integrator::Rk3;
    else if (integ == "implicit-midpoint")
        sc.integrator = Integrator::ImplicitMidpoint;
    else
        throw ConfigError("dns.integrator must be rk3 or implicit-midpoint");
    sc.forcing_enabled = cfg.get_bool("forcing.enabled", true);
    sc.forcing.k_f = static_cast<int>(cfg.get_int("forcing.k_f", 32));
    sc.forcing.bandwidth = static_cast<int>(cfg.get_int("forcing.bandwidth", 1));
    sc.forcing.epsilon = cfg.get_double("forcing.epsilon", 1.0);
    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return sc;
}

int cmd_dns_run(CommandContext& ctx) {
    const std::uint64_t seed = ctx.seed_for("dns.seed");
    const SolverConfig sc = solver_config_from(ctx.cfg, seed);
    const double spin_up =
        ctx.cfg.get_double("dns.spin_up", sc.alpha > 0 ? 20.0 / sc.alpha : 0.0);
    const double collect = ctx.cfg.require_double("dns.collect");
    const auto spin_steps = static_cast<long>(std::llround(spin_up / sc.dt));
    const auto collect_steps = static_cast<long>(std::llround(collect / sc.dt));

    const std::vector<Vec2i> modes = ctx.cfg.get_mode_list("modes.list");
    const int sample_every =
        static_cast<int>(ctx.cfg.get_int("modes.sample_every", 1));
    const int spectrum_every =
        static_cast<int>(ctx.cfg.get_int("output.spectrum_every", 25));
    const int energy_every =
        static_cast<int>(ctx.cfg.get_int("output.energy_every", 10));

    Nse2dSolver solver(sc);
    VorticityState state = zero_state(sc.n);
    for (long s = 0; s < spin_steps; ++s) solver.step(state);

    ModeRecorder recorder(modes, sample_every, sc.dt);
    SpectrumAccumulator spectrum;
    std::vector<double> et, ee, ez;
    for (long s = 0; s < collect_steps; ++s) {
        solver.step(state);
        recorder.observe(state, s + 1);
        if ((s + 1) % spectrum_every == 0) spectrum.observe(state);
        if ((s + 1) % energy_every == 0) {
            et.push_back(state.time);
            ee.push_back(kinetic_energy(state));
            ez.push_back(enstrophy(state));
        }
    }

    const EnergySpectrum es = spectrum.mean();
    write_csv(ctx.target("spectrum.csv"), {{"k", "energy"}, {es.k, es.e}});
    write_csv(ctx.target("energy.csv"),
              {{"t", "kinetic_energy", "enstrophy"},
               {as_array(et), as_array(ee), as_array(ez)}});
    for (auto& series : recorder.take()) {
        const std::string name = "mode_" + std::to_string(series.k.x()) + "_" +
                                 std::to_string(series.k.y()) + ".csv";
        const ArrayXd t = ArrayXd::LinSpaced(
            series.samples.size(), spin_up + series.dt_sample,
            spin_up + series.dt_sample * double(series.samples.size()));
        write_csv(ctx.target(name), {{"t", "value"}, {t, series.samples}});
    }
    write_snapshot(ctx.target("final.snap"), state, {sc.nu, sc.alpha, sc.seed});
    finalize_manifest(ctx, "dns run");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// modes extract

int cmd_modes_extract(CommandContext& ctx) {
    const auto snaps = ctx.cfg.get_list("extract.snapshots");
    const auto modes = ctx.cfg.get_mode_list("extract.modes");
    if (snaps.empty()) throw ConfigError("extract.snapshots is empty");
    if (modes.empty()) throw ConfigError("extract.modes is empty");

    std::map<std::string, std::string> inputs;
    std::vector<double> times;
    std::vector<std::vector<double>> values(modes.size());
    for (const auto& snap : snaps) {
        const VorticityState s = read_snapshot(snap);
        inputs[snap] = file_digest(snap);
        const int n = s.n();
        const int kc = n / 3;
        times.push_back(s.time);
        for (std::size_t m = 0; m < modes.size(); ++m) {
            const auto& k = modes[m];
            if (std::abs(k.x()) > kc || std::abs(k.y()) > kc)
                throw ConfigError("extract mode outside the resolved band");
            values[m].push_back(
                s.omega_hat((k.x() + n) % n, (k.y() + n) % n).real());
        }
    }
    for (std::size_t m = 0; m < modes.size(); ++m) {
        const std::string name = "extracted_" + std::to_string(modes[m].x()) +
                                 "_" + std::to_string(modes[m].y()) + ".csv";
        write_csv(ctx.target(name),
                  {{"t", "value"}, {as_array(times), as_array(values[m])}});
    }
    finalize_manifest(ctx, "modes extract", inputs);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// diag run

int cmd_diag_run(CommandContext& ctx) {
    const auto inputs = ctx.cfg.get_list("diag.inputs");
    if (inputs.empty()) {
        std::cerr << "[filtnoise] warning: diag.inputs is empty, nothing to do\n";
        finalize_manifest(ctx, "diag run");
        return kExitOk;
    }
    const double level = ctx.cfg.get_double("diag.level", 0.95);
    std::vector<double> beta_grid;
    for (const auto& b : ctx.cfg.get_list("diag.beta_grid")) {
        if (b == "inf" || b == "infinity")
            beta_grid.push_back(std::numeric_limits<double>::infinity());
        else
            beta_grid.push_back(std::stod(b));
    }
    if (beta_grid.empty())
        beta_grid = {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0,
                     std::numeric_limits<double>::infinity()};

    std::map<std::string, std::string> input_digests;
    std::vector<ArrayXd> all_series;
    std::vector<std::string> names;
    std::vector<double> c_id, c_lag, c_lt, c_r, c_v, c_ci;

    for (const auto& input : inputs) {
        const CsvTable t = read_csv(input);
        input_digests[input] = file_digest(input);
        const ArrayXd& tt = t.column("t");
        const ArrayXd& vv = t.column("value");
        if (tt.size() < 3) throw ParseError(input + ": series too short");
        const double dt = tt[1] - tt[0];
        const double span = tt[tt.size() - 1] - tt[0];
        const double max_lag = ctx.cfg.get_double("diag.max_lag", span / 10.0);

        AutocorrEstimate est = autocorrelation(vv, dt, max_lag);
        attach_bartlett_ci(est, level);
        const IncrementVariance iv = increment_variance(est);

        json rec;
        const std::string name = fs::path(input).stem().string();
        rec["series"] = name;
        rec["n_samples"] = est.n_samples;
        rec["dt"] = dt;
        rec["level"] = level;
        double tau_val = 0.0;
        try {
            const RelaxationEstimate tau = relaxation_time(est);
            tau_val = tau.tau;
            rec["tau"] = tau.tau;
            rec["truncation_lag"] = tau.truncation_lag;
            const KernelFit fit = fit_beta(est, tau, beta_grid);
            rec["beta_star"] =
                std::isinf(fit.beta_star) ? json("inf") : json(fit.beta_star);
            rec["fit_objective"] = fit.objective;
        } catch (const IncompleteIntegrationError& e) {
            rec["tau_error"] = e.what();
            rec["tau_partial"] = e.partial;
        } catch (const std::domain_error& e) {
            rec["fit_error"] = e.what();
        }
        if (vv.size() >= 10000) {
            const GaussianityStats g = gaussianity_check(vv);
            rec["skewness"] = g.skewness;
            rec["excess_kurtosis"] = g.excess_kurtosis;
            rec["ks_statistic"] = g.ks_statistic;
        }
        rec["lags"] = std::vector<double>(est.lags.data(),
                                          est.lags.data() + est.lags.size());
        rec["r"] = std::vector<double>(est.values.data(),
                                       est.values.data() + est.values.size());
        rec["ci"] = std::vector<double>(
            est.ci_halfwidths.data(),
            est.ci_halfwidths.data() + est.ci_halfwidths.size());

        std::ofstream of(ctx.target("diag_" + name + ".json"), std::ios::binary);
        of << rec.dump(2) << "\n";

        for (Eigen::Index j = 0; j < est.lags.size(); ++j) {
            c_id.push_back(double(names.size()));
            c_lag.push_back(est.lags[j]);
            c_lt.push_back(tau_val > 0 ? est.lags[j] / tau_val : 0.0);
            c_r.push_back(est.values[j]);
            c_v.push_back(iv.values[j]);
            c_ci.push_back(est.ci_halfwidths[j]);
        }
        names.push_back(name);
        all_series.push_back(vv);
    }

    bool equal = true;
    for (const auto& s : all_series)
        if (s.size() != all_series.front().size()) equal = false;
    if (equal && all_series.size() > 1) {
        const CrossCorrelation cc = cross_correlation(all_series);
        std::vector<double> mi, mj, mv;
        for (int i = 0; i < cc.corr.rows(); ++i)
            for (int j = 0; j < cc.corr.cols(); ++j) {
                mi.push_back(i);
                mj.push_back(j);
                mv.push_back(cc.corr(i, j));
            }
        write_csv(ctx.target("cross_correlation.csv"),
                  {{"i", "j", "corr"}, {as_array(mi), as_array(mj), as_array(mv)}});
    }

    write_csv(ctx.target("collapse.csv"),
              {{"series", "lag", "lag_over_tau", "r", "v", "ci"},
               {as_array(c_id), as_array(c_lag), as_array(c_lt), as_array(c_r),
                as_array(c_v), as_array(c_ci)}});
    {
        json idx;
        for (std::size_t i = 0; i < names.size(); ++i)
            idx[std::to_string(i)] = names[i];
        std::ofstream of(ctx.target("series_index.json"), std::ios::binary);
        of << idx.dump(2) << "\n";
    }
    finalize_manifest(ctx, "diag run", input_digests);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth build

int cmd_synth_build(CommandContext& ctx) {
    const std::uint64_t seed = ctx.seed_for("synth.seed");
    const std::string kernel_spec = ctx.cfg.get_string("synth.kernel", "gaussian");
    const Kernel kernel = parse_kernel(kernel_spec);
    const double tau = ctx.cfg.require_double("synth.tau");
    const double energy = ctx.cfg.require_double("synth.e_kmax");
    ShellSpec shell;
    shell.k_max = static_cast<int>(ctx.cfg.require_int("synth.k_max"));
    shell.half_width = static_cast<int>(ctx.cfg.get_int("synth.half_width", 1));

    SyntheticField field;
    try {
        field = build_umax(energy, shell, kernel, tau, seed);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }

    json j;
    j["kernel"] = kernel_to_json(kernel);
    j["kernel_spec"] = kernel_spec;
    j["tau"] = tau;
    j["energy"] = energy;
    j["k_max"] = shell.k_max;
    j["half_width"] = shell.half_width;
    j["seed"] = seed;
    j["amplitude"] = field.amplitude;
    json wv = json::array();
    for (const auto& k : field.wavevectors) wv.push_back({k.x(), k.y()});
    j["wavevectors"] = wv;
    {
        std::ofstream of(ctx.target("field.json"), std::ios::binary);
        of << j.dump(2) << "\n";
    }

    if (ctx.cfg.get_bool("synth.cache_paths", false)) {
        const double dt = ctx.cfg.get_double("synth.path_dt", tau / 50.0);
        const double horizon = ctx.cfg.get_double("synth.horizon", 50.0 * tau);
        const FieldRealization real(field, dt, horizon, 0);
        for (std::size_t m = 0; m < field.wavevectors.size(); ++m) {
            const auto& cp = real.path(static_cast<int>(m), BasisMode::Parity::Cos);
            const auto& sp = real.path(static_cast<int>(m), BasisMode::Parity::Sin);
            const std::string name =
                "path_" + std::to_string(field.wavevectors[m].x()) + "_" +
                std::to_string(field.wavevectors[m].y()) + ".csv";
            write_csv(ctx.target(name), {{"t", "xi_cos", "xi_sin"},
                                         {cp.times, cp.values, sp.values}});
        }
    }
    finalize_manifest(ctx, "synth build");
    return kExitOk;
}

SyntheticField field_from_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingInputError("missing field spec: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    ShellSpec shell;
    shell.k_max = j.at("k_max").get<int>();
    shell.half_width = j.at("half_width").get<int>();
    return build_umax(j.at("energy").get<double>(), shell,
                      parse_kernel(j.at("kernel_spec").get<std::string>()),
                      j.at("tau").get<double>(), j.at("seed").get<std::uint64_t>());
}

// ---------------------------------------------------------------------------
// tracer disperse / predict

struct FieldChoice {
    enum class Type { Synth, White, Dns, Constant } type;
    fs::path path;
    Vec2 u0 = Vec2::Zero();
};

FieldChoice parse_field(const std::string& s) {
    FieldChoice f{FieldChoice::Type::Synth, {}, Vec2::Zero()};
    if (s.rfind("synth:", 0) == 0) {
        f.path = s.substr(6);
    } else if (s.rfind("white:", 0) == 0) {
        f.type = FieldChoice::Type::White;
        f.path = s.substr(6);
    } else if (s.rfind("dns:", 0) == 0) {
        f.type = FieldChoice::Type::Dns;
        f.path = s.substr(4);
    } else if (s.rfind("constant:", 0) == 0) {
        f.type = FieldChoice::Type::Constant;
        const std::string rest = s.substr(9);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw ConfigError("constant field needs ux,uy");
        try {
            f.u0 = {std::stod(rest.substr(0, comma)),
                    std::stod(rest.substr(comma + 1))};
        } catch (const std::exception&) {
            throw ConfigError("constant field needs numeric ux,uy");
        }
    } else {
        throw ConfigError("tracer.field must be synth:|white:|dns:|constant:");
    }
    return f;
}

void write_curve(CommandContext& ctx, const std::string& name,
                 const DispersionCurve& c) {
    write_csv(ctx.target(name), {{"t", "var_x", "stderr_x", "var_total"},
                                 {c.times, c.var_x, c.stderr_x, c.var_total}});
}

int cmd_tracer_disperse(CommandContext& ctx) {
    const FieldChoice field = parse_field(ctx.cfg.require_string("tracer.field"));
    AdvectOptions opts;
    opts.m = static_cast<int>(ctx.cfg.get_int("tracer.m", 10000));
    opts.dt = ctx.cfg.require_double("tracer.dt");
    opts.horizon = ctx.cfg.require_double("tracer.horizon");
    opts.blocks = static_cast<int>(ctx.cfg.get_int("tracer.blocks", 50));
    opts.seed = ctx.seed_for("tracer.seed");

    DispersionCurve curve;
    double tau = 0.0;
    bool have_prediction = false;
    VariancePrediction pred;
    std::map<std::string, std::string> inputs;

    switch (field.type) {
        case FieldChoice::Type::Synth: {
            const SyntheticField f = field_from_json(field.path);
            inputs[field.path.string()] = file_digest(field.path);
            curve = advect(f, opts);
            tau = f.tau;
            pred = {f.kernel.covariance, f.tau, f.energy};
            have_prediction = true;
            break;
        }
        case FieldChoice::Type::White: {
            const SyntheticField f = field_from_json(field.path);
            inputs[field.path.string()] = file_digest(field.path);
            curve = advect(white_noise_field(f), opts);
            tau = f.tau;
            pred = {f.kernel.covariance, f.tau, f.energy};
            have_prediction = true;
            break;
        }
        case FieldChoice::Type::Dns: {
            const Manifest m = read_manifest(field.path);
            Config run_cfg;
            for (const auto& [k, v] : m.config) run_cfg.set(k, v);
            SnapshotMeta meta;
            VorticityState state = read_snapshot(field.path / "final.snap", &meta);
            const SolverConfig sc = solver_config_from(run_cfg, meta.seed);
            if (std::abs(opts.dt - sc.dt) > 1e-15 * sc.dt)
                throw ConfigError("tracer.dt must equal the dns run dt");
            inputs[(field.path / "final.snap").string()] =
                file_digest(field.path / "final.snap");
            Nse2dSolver solver(sc);
            solver.set_step_index(
                static_cast<long>(std::llround(state.time / sc.dt)));
            curve = advect_dns(solver, state, opts);
            tau = ctx.cfg.get_double("tracer.tau", 0.0);
            if (!(tau > 0.0))
                throw ConfigError("tracer.tau is required for dns fields");
            break;
        }
        case FieldChoice::Type::Constant: {
            curve = advect_constant(field.u0, opts);
            tau = ctx.cfg.get_double("tracer.tau", 0.0);
            if (!(tau > 0.0))
                throw ConfigError("tracer.tau is required for constant fields");
            break;
        }
    }

    write_curve(ctx, "dispersion.csv", curve);
    if (have_prediction)
        write_curve(ctx, "prediction.csv", predict_curve(pred, curve.times));

    json rep;
    rep["tau"] = tau;
    try {
        const RegimeReport r = regime_check(curve, tau);
        rep["slope_short"] = r.slope_short;
        rep["slope_long"] = r.slope_long;
        rep["transition_estimate"] = r.transition_estimate;
        rep["ballistic_only"] = r.slope_long > 1.7;
        auto band = [&](const std::string& key, double v) {
            if (!ctx.cfg.has(key)) return;
            const auto parts = ctx.cfg.get_string(key, "");
            const auto comma = parts.find(',');
            if (comma == std::string::npos)
                throw ConfigError(key + " must be lo,hi");
            const double lo = std::stod(parts.substr(0, comma));
            const double hi = std::stod(parts.substr(comma + 1));
            rep["bands"][key] = {{"lo", lo},
                                 {"hi", hi},
                                 {"value", v},
                                 {"pass", v >= lo && v <= hi}};
        };
        band("bands.slope_short", r.slope_short);
        band("bands.slope_long", r.slope_long);
    } catch (const std::domain_error& e) {
        // span too short is a hard error per the command contract
        throw std::invalid_argument(std::string(e.what()) +
                                    " (required span: [tau/50, 50 tau] = [" +
                                    std::to_string(tau / 50.0) + ", " +
                                    std::to_string(50.0 * tau) + "])");
    }
    {
        std::ofstream of(ctx.target("regime.json"), std::ios::binary);
        of << rep.dump(2) << "\n";
    }
    finalize_manifest(ctx, "tracer disperse", inputs);
    return kExitOk;
}

int cmd_tracer_predict(CommandContext& ctx) {
    const Kernel kernel =
        parse_kernel(ctx.cfg.get_string("predict.kernel", "gaussian"));
    const double tau = ctx.cfg.require_double("predict.tau");
    const double energy = ctx.cfg.require_double("predict.energy");
    const double horizon = ctx.cfg.get_double("predict.horizon", 50.0 * tau);
    const long points = ctx.cfg.get_int("predict.points", 400);

    std::vector<double> ts = {0.0};
    const double t0 = tau / 100.0;
    const double grow = std::pow(horizon / t0, 1.0 / double(points - 2));
    for (double t = t0; t <= horizon * (1 + 1e-12); t *= grow) ts.push_back(t);
    const VariancePrediction pred{kernel.covariance, tau, energy};
    write_curve(ctx, "prediction.csv", predict_curve(pred, as_array(ts)));
    finalize_manifest(ctx, "tracer predict");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report collapse

int cmd_report_collapse(CommandContext& ctx) {
    const auto inputs = ctx.cfg.get_list("report.inputs");
    if (inputs.empty()) {
        std::cerr << "[filtnoise] warning: report.inputs is empty\n";
        finalize_manifest(ctx, "report collapse");
        return kExitOk;
    }
    std::map<std::string, std::string> digests;
    std::vector<double> c_id, c_lt, c_r, c_v, c_ci;
    json index;
    int id = 0;
    for (const auto& input : inputs) {
        std::ifstream in(input);
        if (!in) throw MissingInputError("missing diag record: " + input);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ParseError(input + ": " + e.what());
        }
        digests[input] = file_digest(input);
        if (!j.contains("tau")) {
            std::cerr << "[filtnoise] warning: " << input
                      << " has no relaxation time, skipped\n";
            continue;
        }
        const double tau = j["tau"].get<double>();
        const auto lags = j.at("lags").get<std::vector<double>>();
        const auto r = j.at("r").get<std::vector<double>>();
        const auto ci = j.at("ci").get<std::vector<double>>();
        for (std::size_t i = 0; i < lags.size(); ++i) {
            c_id.push_back(id);
            c_lt.push_back(lags[i] / tau);
            c_r.push_back(r[i]);
            c_v.push_back(1.0 - r[i]);
            c_ci.push_back(ci[i]);
        }
        index[std::to_string(id)] = j.value("series", input);
        ++id;
    }
    write_csv(ctx.target("collapse.csv"),
              {{"series", "lag_over_tau", "r", "v", "ci"},
               {as_array(c_id), as_array(c_lt), as_array(c_r), as_array(c_v),
                as_array(c_ci)}});
    {
        std::ofstream of(ctx.target("series_index.json"), std::ios::binary);
        of << index.dump(2) << "\n";
    }
    finalize_manifest(ctx, "report collapse", digests);
    return kExitOk;
}

// ---------------------------------------------------------------------------

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& out_dir, std::uint64_t seed, bool seed_set,
             int threads) {
    if (threads > 0) omp_set_num_threads(threads);

    CommandContext ctx;
    try {
        ctx.cfg = Config::load(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "filtnoise: " << e.what() << "\n";
        return kExitConfig;
    }
    ctx.out = out_dir;
    ctx.seed = seed;
    ctx.seed_overridden = seed_set;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) {
        std::cerr << "filtnoise: cannot create output directory " << out_dir << "\n";
        return kExitConfig;
    }

    auto cleanup = [&ctx]() {
        for (const auto& p : ctx.written) {
            std::error_code rec;
            fs::remove(p, rec);
        }
    };

    try {
        if (command == "dns run") return cmd_dns_run(ctx);
        if (command == "modes extract") return cmd_modes_extract(ctx);
        if (command == "diag run") return cmd_diag_run(ctx);
        if (command == "synth build") return cmd_synth_build(ctx);
        if (command == "tracer disperse") return cmd_tracer_disperse(ctx);
        if (command == "tracer predict") return cmd_tracer_predict(ctx);
        if (command == "report collapse") return cmd_report_collapse(ctx);
        std::cerr << "filtnoise: unknown command " << command << "\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        cleanup();
        std::cerr << "filtnoise: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const MissingInputError& e) {
        cleanup();
        std::cerr << "filtnoise: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const ParseError& e) {
        cleanup();
        std::cerr << "filtnoise: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const BlowUpError& e) {
        cleanup();
        std::cerr << "filtnoise: numeric failure at step " << e.step << ": "
                  << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        cleanup();
        std::cerr << "filtnoise: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::domain_error& e) {
        cleanup();
        std::cerr << "filtnoise: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        cleanup();
        std::cerr << "filtnoise: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"filtered-noise turbulence modeling pipeline"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 0;
    int threads = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "seed override")
            ->each([&seed_set](const std::string&) { seed_set = true; });
        cmd->add_option("--threads", threads, "worker threads")
            ->envname("FILTNOISE_THREADS");
    };

    std::string selected;
    auto leaf = [&](CLI::App* parent, const std::string& group,
                    const std::string& name, const std::string& help) {
        CLI::App* cmd = parent->add_subcommand(name, help);
        add_common(cmd);
        cmd->callback([&selected, group, name]() { selected = group + " " + name; });
        return cmd;
    };

    CLI::App* dns = app.add_subcommand("dns", "direct numerical simulation");
    dns->require_subcommand(1);
    leaf(dns, "dns", "run", "forced 2D vorticity run with recorders");

    CLI::App* modes = app.add_subcommand("modes", "Fourier mode series");
    modes->require_subcommand(1);
    leaf(modes, "modes", "extract", "extract mode series from snapshots");

    CLI::App* diag = app.add_subcommand("diag", "mode statistics");
    diag->require_subcommand(1);
    leaf(diag, "diag", "run", "autocorrelation, relaxation times, kernel fits");

    CLI::App* synth = app.add_subcommand("synth", "synthetic velocity fields");
    synth->require_subcommand(1);
    leaf(synth, "synth", "build", "build a shell-restricted field spec");

    CLI::App* tracer = app.add_subcommand("tracer", "passive tracer transport");
    tracer->require_subcommand(1);
    leaf(tracer, "tracer", "disperse", "Monte Carlo dispersion curves");
    leaf(tracer, "tracer", "predict", "closed-form variance prediction");

    CLI::App* report = app.add_subcommand("report", "plot-ready assemblies");
    report->require_subcommand(1);
    leaf(report, "report", "collapse", "rescaled-lag collapse CSV");

    CLI11_PARSE(app, argc, argv);
    return dispatch(selected, config_path, out_dir, seed, seed_set, threads);
}
