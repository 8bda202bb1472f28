#pragma once

#include <cstdint>

#include "filtnoise/common.hpp"
#include "filtnoise/kernels.hpp"

namespace filtnoise {

/// Parameters of a filtered-noise realization
/// xi_t = int theta((t-s)/tau) / sqrt(tau) dW_s on a uniform grid.
struct FilteredNoiseSpec {
    Kernel kernel;
    double tau = 1.0;      ///< relaxation time
    double dt = 0.01;      ///< sampling step
    double horizon = 1.0;  ///< total duration T
    std::uint64_t seed = 0;

    /// Throws on non-finite or non-positive parameters and on dt > tau
    /// (aliasing). Returns true when dt <= tau/10, false as a soft warning.
    bool validate() const;
};

struct SamplePath {
    ArrayXd times;
    ArrayXd values;
    double tau = 1.0;
    double dt = 0.01;
    std::uint64_t seed = 0;
    std::string kernel_label;
};

/// Discrete convolution of the truncated kernel against iid normals on the
/// sampling grid, extended by the kernel support on both sides; weights are
/// rescaled by one scalar so the path variance is exactly C(0) = 1.
/// Deterministic for fixed seed.
SamplePath simulate_path(const FilteredNoiseSpec& spec);

struct Autocovariance {
    ArrayXd lags;    ///< time units, starting at 0
    ArrayXd values;  ///< biased (1/N) estimator, mean removed
};

/// value(0) is the sample variance; only nonnegative lags are returned.
Autocovariance empirical_autocovariance(const SamplePath& path, int max_lag);

/// Cumulative trapezoid integral, starting at 0.
SamplePath integrated_path(const SamplePath& path);

/// Coupled white-noise limit experiment: xi and sqrt(tau) W are built from
/// the same driving normals; rms over realizations of I(t) - sqrt(tau) W_t
/// is compared against the bound sqrt(2M) tau.
struct WhiteNoiseGap {
    ArrayXd probe_times;
    ArrayXd rms_at_probes;
    double rms_gap;  ///< at the final time
    double bound;    ///< sqrt(2 M) tau
};

WhiteNoiseGap white_noise_gap(const FilteredNoiseSpec& spec, int n_realizations);

}  // namespace filtnoise
