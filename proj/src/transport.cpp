#include "filtnoise/transport.hpp"

#include <cmath>
#include <vector>

#include "filtnoise/quadrature.hpp"
#include "filtnoise/rng.hpp"

namespace filtnoise {

namespace {

struct BlockLayout {
    std::vector<int> offset;  // particle index range per block
    std::vector<int> count;
};

BlockLayout make_blocks(int m, int blocks) {
    BlockLayout b;
    int done = 0;
    for (int i = 0; i < blocks; ++i) {
        const int c = m / blocks + (i < m % blocks ? 1 : 0);
        b.offset.push_back(done);
        b.count.push_back(c);
        done += c;
    }
    return b;
}

/// Combine per-block sums into the curve. sums_x2/sums_r2 are
/// (n_times x blocks); weights are the block particle counts.
DispersionCurve reduce_blocks(const ArrayXd& times, const ArrayXXd& sum_x2,
                              const ArrayXXd& sum_r2, const BlockLayout& layout,
                              int m) {
    const auto nt = times.size();
    const auto nb = static_cast<Eigen::Index>(layout.count.size());
    DispersionCurve out;
    out.times = times;
    out.var_x.setZero(nt);
    out.stderr_x.setZero(nt);
    out.var_total.setZero(nt);
    for (Eigen::Index t = 0; t < nt; ++t) {
        double total_x2 = 0.0, total_r2 = 0.0;
        for (Eigen::Index b = 0; b < nb; ++b) {
            total_x2 += sum_x2(t, b);
            total_r2 += sum_r2(t, b);
        }
        out.var_x[t] = total_x2 / m;
        out.var_total[t] = total_r2 / m;
        // Spread of the per-block means around the global mean.
        double ss = 0.0;
        for (Eigen::Index b = 0; b < nb; ++b) {
            const double bm = sum_x2(t, b) / layout.count[b];
            const double d = bm - out.var_x[t];
            ss += d * d;
        }
        if (nb > 1)
            out.stderr_x[t] = std::sqrt(ss / double(nb - 1) / double(nb));
    }
    return out;
}

void check_finite(const std::vector<Vec2>& pos, long step) {
    for (const auto& p : pos)
        if (!p.allFinite())
            throw BlowUpError(step, "tracer position became non-finite");
}

}  // namespace

DispersionCurve advect(const SyntheticField& field, const AdvectOptions& opts) {
    const auto n_steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
    const ArrayXd times =
        ArrayXd::LinSpaced(n_steps + 1, 0.0, opts.dt * double(n_steps));
    const BlockLayout layout = make_blocks(opts.m, opts.blocks);
    ArrayXXd sum_x2 = ArrayXXd::Zero(n_steps + 1, opts.blocks);
    ArrayXXd sum_r2 = ArrayXXd::Zero(n_steps + 1, opts.blocks);

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < opts.blocks; ++b) {
        const FieldRealization real(field, opts.dt, opts.horizon + opts.dt,
                                    static_cast<std::uint64_t>(b));
        Rng rng(mix_key(opts.seed, 0x706f73, b));
        const int mb = layout.count[b];
        std::vector<Vec2> pos(mb), origin(mb), vel_prev(mb);
        for (int p = 0; p < mb; ++p) {
            origin[p] = opts.random_initial_positions
                            ? Vec2(kTwoPi * rng.next_uniform(),
                                   kTwoPi * rng.next_uniform())
                            : Vec2(0, 0);
            pos[p] = origin[p];
        }
        for (int s = 0; s <= n_steps; ++s) {
            if (s > 0) {
                const double t = times[s - 1];
                for (int p = 0; p < mb; ++p) {
                    const Vec2 v = real.velocity(pos[p], t);
                    // AB2 with Euler bootstrap
                    const Vec2 rate = s == 1 ? v : Vec2(1.5 * v - 0.5 * vel_prev[p]);
                    pos[p] += opts.dt * rate;
                    vel_prev[p] = v;
                }
            }
            double sx = 0.0, sr = 0.0;
            for (int p = 0; p < mb; ++p) {
                const Vec2 d = pos[p] - origin[p];
                sx += d.x() * d.x();
                sr += d.squaredNorm();
            }
            sum_x2(s, b) = sx;
            sum_r2(s, b) = sr;
        }
        check_finite(pos, n_steps);
    }
    return reduce_blocks(times, sum_x2, sum_r2, layout, opts.m);
}

DispersionCurve advect(const WhiteNoiseField& field, const AdvectOptions& opts) {
    const auto n_steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
    const ArrayXd times =
        ArrayXd::LinSpaced(n_steps + 1, 0.0, opts.dt * double(n_steps));
    const BlockLayout layout = make_blocks(opts.m, opts.blocks);
    ArrayXXd sum_x2 = ArrayXXd::Zero(n_steps + 1, opts.blocks);
    ArrayXXd sum_r2 = ArrayXXd::Zero(n_steps + 1, opts.blocks);
    const auto& wv = field.base.wavevectors;
    const auto nk = wv.size();

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < opts.blocks; ++b) {
        Rng rng(mix_key(opts.seed, 0x706f73, b));
        const int mb = layout.count[b];
        std::vector<Vec2> pos(mb), origin(mb);
        for (int p = 0; p < mb; ++p) {
            origin[p] = opts.random_initial_positions
                            ? Vec2(kTwoPi * rng.next_uniform(),
                                   kTwoPi * rng.next_uniform())
                            : Vec2(0, 0);
            pos[p] = origin[p];
        }
        ArrayXd coeffs(2 * nk);
        for (int s = 0; s <= n_steps; ++s) {
            if (s > 0) {
                for (std::size_t m = 0; m < 2 * nk; ++m)
                    coeffs[static_cast<long>(m)] = white_noise_coefficient(
                        field, static_cast<std::uint64_t>(b),
                        static_cast<int>(m), s - 1, opts.dt);
                for (int p = 0; p < mb; ++p) {
                    const Vec2 v = FieldRealization::velocity_with_coefficients(
                        field.base, coeffs, pos[p]);
                    pos[p] += opts.dt * v;  // Euler-Maruyama
                }
            }
            double sx = 0.0, sr = 0.0;
            for (int p = 0; p < mb; ++p) {
                const Vec2 d = pos[p] - origin[p];
                sx += d.x() * d.x();
                sr += d.squaredNorm();
            }
            sum_x2(s, b) = sx;
            sum_r2(s, b) = sr;
        }
        check_finite(pos, n_steps);
    }
    return reduce_blocks(times, sum_x2, sum_r2, layout, opts.m);
}

DispersionCurve advect_dns(Nse2dSolver& solver, VorticityState& state,
                           const AdvectOptions& opts) {
    if (std::abs(opts.dt - solver.config().dt) > 1e-15 * solver.config().dt)
        throw std::invalid_argument("advect_dns: opts.dt must match the solver dt");
    const auto n_steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
    const ArrayXd times =
        ArrayXd::LinSpaced(n_steps + 1, 0.0, opts.dt * double(n_steps));
    const int nb = 16;  // stderr blocks (single flow realization)
    const BlockLayout layout = make_blocks(opts.m, nb);
    ArrayXXd sum_x2 = ArrayXXd::Zero(n_steps + 1, nb);
    ArrayXXd sum_r2 = ArrayXXd::Zero(n_steps + 1, nb);

    Rng rng(mix_key(opts.seed, 0x706f73));
    std::vector<Vec2> pos(opts.m), origin(opts.m), vel_prev(opts.m);
    for (int p = 0; p < opts.m; ++p) {
        origin[p] = opts.random_initial_positions
                        ? Vec2(kTwoPi * rng.next_uniform(),
                               kTwoPi * rng.next_uniform())
                        : Vec2(0, 0);
        pos[p] = origin[p];
    }

    auto record = [&](int s) {
        for (int b = 0; b < nb; ++b) {
            double sx = 0.0, sr = 0.0;
            for (int p = layout.offset[b]; p < layout.offset[b] + layout.count[b];
                 ++p) {
                const Vec2 d = pos[p] - origin[p];
                sx += d.x() * d.x();
                sr += d.squaredNorm();
            }
            sum_x2(s, b) = sx;
            sum_r2(s, b) = sr;
        }
    };

    record(0);
    for (int s = 1; s <= n_steps; ++s) {
        const Nse2dSolver::Sampler sampler = solver.make_sampler(state);
#pragma omp parallel for schedule(static)
        for (int p = 0; p < opts.m; ++p) {
            const Vec2 v = sampler(pos[p]);
            const Vec2 rate = s == 1 ? v : Vec2(1.5 * v - 0.5 * vel_prev[p]);
            pos[p] += opts.dt * rate;
            vel_prev[p] = v;
        }
        solver.step(state);
        record(s);
        if (s % 1000 == 0) check_finite(pos, s);
    }
    check_finite(pos, n_steps);
    return reduce_blocks(times, sum_x2, sum_r2, layout, opts.m);
}

DispersionCurve advect_constant(const Vec2& u0, const AdvectOptions& opts) {
    const auto n_steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
    DispersionCurve out;
    out.times = ArrayXd::LinSpaced(n_steps + 1, 0.0, opts.dt * double(n_steps));
    out.var_x = (out.times * u0.x()).square();
    out.var_total = out.times.square() * u0.squaredNorm();
    out.stderr_x = ArrayXd::Zero(n_steps + 1);
    return out;
}

double predict_variance(const VariancePrediction& pred, double t) {
    if (t < 0.0) throw std::domain_error("predict_variance: t < 0");
    if (t == 0.0) return 0.0;
    const double x = t / pred.tau;
    // int_0^x Gamma(r) dr = x Gamma(x) - int_0^x r C(r) dr
    const double gx = gamma_integral(pred.covariance, x);
    const double hi = std::min(x, pred.covariance.support);
    const double rc = quad::integrate(
        [&](double r) { return r * pred.covariance(r); }, 0.0, hi, 1e-12);
    return pred.tau * pred.tau * pred.energy * (x * gx - rc);
}

DispersionCurve predict_curve(const VariancePrediction& pred,
                              const ArrayXd& times) {
    DispersionCurve out;
    out.times = times;
    out.var_x.resize(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i)
        out.var_x[i] = predict_variance(pred, times[i]);
    out.var_total = 2.0 * out.var_x;  // isotropic model
    out.stderr_x = ArrayXd::Zero(times.size());
    return out;
}

namespace {
/// Least-squares fit of log y = a + s log t over a window; returns false
/// when fewer than 3 points fall inside.
bool loglog_fit(const ArrayXd& t, const ArrayXd& y, double lo, double hi,
                double& a, double& s) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t[i] < lo || t[i] > hi || !(t[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(t[i]), ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 3) return false;
    const double dn = double(n);
    s = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
    a = (sy - s * sx) / dn;
    return true;
}
}  // namespace

RegimeReport regime_check(const DispersionCurve& curve, double tau) {
    double t_first = 0.0;
    for (Eigen::Index i = 0; i < curve.times.size(); ++i)
        if (curve.times[i] > 0.0) {
            t_first = curve.times[i];
            break;
        }
    if (!(t_first > 0.0) || t_first > tau / 50.0 ||
        curve.times[curve.times.size() - 1] < 50.0 * tau)
        throw std::domain_error(
            "regime_check: curve must span [tau/50, 50 tau]");
    RegimeReport rep;
    double a1 = 0.0, a2 = 0.0;
    if (!loglog_fit(curve.times, curve.var_x, tau / 50.0, tau / 5.0, a1,
                    rep.slope_short) ||
        !loglog_fit(curve.times, curve.var_x, 5.0 * tau, 50.0 * tau, a2,
                    rep.slope_long))
        throw std::domain_error("regime_check: too few usable points in a window");
    rep.transition_estimate =
        std::abs(rep.slope_short - rep.slope_long) > 1e-12
            ? std::exp((a2 - a1) / (rep.slope_short - rep.slope_long))
            : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

Diffusivity effective_diffusivity(double tau, double e) {
    if (!(tau > 0.0 && e > 0.0))
        throw std::domain_error("effective_diffusivity: tau and E must be > 0");
    return {tau * e / 4.0, tau * e / 2.0};
}

}  // namespace filtnoise
