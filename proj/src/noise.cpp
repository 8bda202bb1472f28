#include "filtnoise/noise.hpp"

#include <cmath>
#include <iostream>
#include <vector>

#include "filtnoise/fft.hpp"
#include "filtnoise/quadrature.hpp"
#include "filtnoise/rng.hpp"

namespace filtnoise {

namespace {

/// Convolution weights w_m = sqrt(dt/tau) theta(m dt/tau), m = -M..M,
/// rescaled so sum w^2 = 1 exactly (unit path variance). For kernels that
/// are singular at x = 0 (Matern beta = 0) the center weight uses the cell
/// average of theta over [-h/2, h/2].
ArrayXd kernel_weights(const Kernel& kernel, double tau, double dt, int& half) {
    const double h = dt / tau;
    half = static_cast<int>(std::ceil(kernel.support_radius / h));
    ArrayXd w(2 * half + 1);
    for (int m = -half; m <= half; ++m)
        w[m + half] = kernel(static_cast<double>(m) * h);
    if (!std::isfinite(w[half])) {
        const double cell =
            2.0 * quad::integrate([&](double x) { return kernel(x); }, 0.0,
                                  0.5 * h, 1e-12) / h;
        w[half] = cell;
    }
    w *= std::sqrt(dt / tau);
    w /= std::sqrt((w * w).sum());
    return w;
}

ArrayXd driving_normals(std::uint64_t seed, int count) {
    Rng rng(seed);
    ArrayXd eta(count);
    for (int i = 0; i < count; ++i) eta[i] = rng.next_normal();
    return eta;
}

}  // namespace

bool FilteredNoiseSpec::validate() const {
    if (!(std::isfinite(tau) && tau > 0.0))
        throw std::domain_error("FilteredNoiseSpec: tau must be positive");
    if (!(std::isfinite(dt) && dt > 0.0))
        throw std::domain_error("FilteredNoiseSpec: dt must be positive");
    if (!(std::isfinite(horizon) && horizon >= dt))
        throw std::domain_error("FilteredNoiseSpec: horizon must be >= dt");
    if (dt > tau)
        throw std::domain_error(
            "FilteredNoiseSpec: dt > tau would alias the kernel");
    return dt <= tau / 10.0;
}

SamplePath simulate_path(const FilteredNoiseSpec& spec) {
    if (!spec.validate())
        std::cerr << "[filtnoise] warning: dt > tau/10 under-resolves the kernel\n";
    const auto n = static_cast<int>(std::llround(spec.horizon / spec.dt)) + 1;
    int half = 0;
    const ArrayXd w = kernel_weights(spec.kernel, spec.tau, spec.dt, half);
    const ArrayXd eta = driving_normals(spec.seed, n + 2 * half);
    const ArrayXd conv = fft_convolve_full(eta, w);

    SamplePath path;
    path.times = ArrayXd::LinSpaced(n, 0.0, spec.dt * static_cast<double>(n - 1));
    path.values = conv.segment(2 * half, n);
    path.tau = spec.tau;
    path.dt = spec.dt;
    path.seed = spec.seed;
    path.kernel_label = spec.kernel.label;
    return path;
}

Autocovariance empirical_autocovariance(const SamplePath& path, int max_lag) {
    const auto n = static_cast<int>(path.values.size());
    if (max_lag >= n / 2)
        throw std::domain_error("empirical_autocovariance: max_lag >= n/2");
    Autocovariance ac;
    ac.values = autocovariance_fft(path.values, max_lag);
    ac.lags = ArrayXd::LinSpaced(max_lag + 1, 0.0,
                                 path.dt * static_cast<double>(max_lag));
    return ac;
}

SamplePath integrated_path(const SamplePath& path) {
    SamplePath out = path;
    const auto n = path.values.size();
    out.values.resize(n);
    out.values[0] = 0.0;
    for (Eigen::Index i = 1; i < n; ++i)
        out.values[i] = out.values[i - 1] +
                        0.5 * path.dt * (path.values[i - 1] + path.values[i]);
    return out;
}

WhiteNoiseGap white_noise_gap(const FilteredNoiseSpec& spec, int n_realizations) {
    if (n_realizations < 100)
        throw std::domain_error("white_noise_gap: need at least 100 realizations");
    const auto n = static_cast<int>(std::llround(spec.horizon / spec.dt)) + 1;
    int half = 0;
    const ArrayXd w = kernel_weights(spec.kernel, spec.tau, spec.dt, half);
    const double sqrt_tau = std::sqrt(spec.tau);
    const double sqrt_dt = std::sqrt(spec.dt);

    const int n_probes = 11;  // 10 interior times plus the final one
    ArrayXd probes(n_probes);
    std::vector<int> probe_idx(n_probes);
    for (int p = 0; p < n_probes; ++p) {
        probe_idx[p] = (p + 1) * (n - 1) / n_probes;
        probes[p] = probe_idx[p] * spec.dt;
    }

    ArrayXXd sq(n_realizations, n_probes);
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < n_realizations; ++r) {
        const ArrayXd eta =
            driving_normals(mix_key(spec.seed, static_cast<std::uint64_t>(r)),
                            n + 2 * half);
        const ArrayXd conv = fft_convolve_full(eta, w);
        // xi on the sampling grid and the coupled Brownian path from the
        // same normals, W(t_i) = sqrt(dt) * sum of eta over [0, t_i).
        double integral = 0.0;
        double brownian = 0.0;
        double prev_xi = conv[2 * half];
        int p = 0;
        for (int i = 1; i < n && p < n_probes; ++i) {
            const double xi = conv[2 * half + i];
            integral += 0.5 * spec.dt * (prev_xi + xi);
            prev_xi = xi;
            brownian += sqrt_dt * eta[half + i - 1];
            if (i == probe_idx[p]) {
                const double gap = integral - sqrt_tau * brownian;
                sq(r, p) = gap * gap;
                ++p;
            }
        }
    }

    WhiteNoiseGap out;
    out.probe_times = probes;
    out.rms_at_probes = (sq.colwise().mean()).sqrt();
    out.rms_gap = out.rms_at_probes[n_probes - 1];
    out.bound = std::sqrt(2.0 * spec.kernel.first_abs_moment) * spec.tau;
    return out;
}

}  // namespace filtnoise
