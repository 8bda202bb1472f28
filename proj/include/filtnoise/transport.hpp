#pragma once

#include <cstdint>

#include "filtnoise/common.hpp"
#include "filtnoise/kernels.hpp"
#include "filtnoise/nse2d.hpp"
#include "filtnoise/synthfield.hpp"

namespace filtnoise {

struct AdvectOptions {
    int m = 10000;           ///< trajectories
    double dt = 1e-3;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    int blocks = 50;         ///< independent field realizations (model fields)
    bool random_initial_positions = true;  ///< else all start at the origin
};

/// Tracer displacement statistics on the step grid. Displacements are
/// unwrapped (never reduced mod 2pi); velocity lookups wrap periodically.
struct DispersionCurve {
    ArrayXd times;
    ArrayXd var_x;      ///< E[X_t^2], first displacement component
    ArrayXd stderr_x;   ///< Monte Carlo standard error (block means)
    ArrayXd var_total;  ///< E[|x_t|^2]
};

/// AB2 advection (Euler bootstrap) in a filtered-noise synthetic field;
/// the ensemble is split into `blocks` independent field realizations.
DispersionCurve advect(const SyntheticField& field, const AdvectOptions& opts);

/// Euler-Maruyama advection in the white-noise approximation of the field
/// (the coefficients are not differentiable, AB2 does not apply).
DispersionCurve advect(const WhiteNoiseField& field, const AdvectOptions& opts);

/// AB2 advection in a DNS velocity field; advances the state in lockstep
/// with the tracers (opts.dt must equal the solver dt).
DispersionCurve advect_dns(Nse2dSolver& solver, VorticityState& state,
                           const AdvectOptions& opts);

/// Uniform constant field (ballistic closed form, for validation).
DispersionCurve advect_constant(const Vec2& u0, const AdvectOptions& opts);

/// Green-Kubo transient prediction
/// E[X_t^2] = tau^2 E int_0^{t/tau} Gamma(r) dr, Gamma(r) = int_0^r C.
struct VariancePrediction {
    CovarianceFunction covariance;
    double tau = 1.0;
    double energy = 1.0;  ///< stationary mean-square velocity E[|u|^2]
};

double predict_variance(const VariancePrediction& pred, double t);
DispersionCurve predict_curve(const VariancePrediction& pred, const ArrayXd& times);

/// Log-log slopes over t in [tau/50, tau/5] and [5 tau, 50 tau], and the
/// intersection of the two fitted power laws.
struct RegimeReport {
    double slope_short = 0.0;
    double slope_long = 0.0;
    double transition_estimate = 0.0;
};
RegimeReport regime_check(const DispersionCurve& curve, double tau);

/// Heat-equation diffusivity tau E / 4 per component and the matching
/// variance slope tau E / 2.
struct Diffusivity {
    double per_component;
    double variance_slope;
};
Diffusivity effective_diffusivity(double tau, double e);

}  // namespace filtnoise
