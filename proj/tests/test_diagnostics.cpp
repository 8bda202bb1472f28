#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "filtnoise/diagnostics.hpp"
#include "filtnoise/kernels.hpp"
#include "filtnoise/rng.hpp"
#include "filtnoise/special.hpp"

using namespace filtnoise;

namespace {

ArrayXd ar1_series(double rho, int n, std::uint64_t seed) {
    ArrayXd x(n);
    Rng rng(seed);
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
        v = rho * v + std::sqrt(1.0 - rho * rho) * rng.next_normal();
        x[i] = v;
    }
    return x;
}

/// Exact covariance sampled on a dense grid, with Bartlett widths for a
/// notional sample count attached.
AutocorrEstimate exact_estimate(const std::function<double(double)>& r,
                                double dt, int lags, long n_samples) {
    AutocorrEstimate est;
    est.lags = ArrayXd::LinSpaced(lags + 1, 0.0, dt * lags);
    est.values.resize(lags + 1);
    for (int j = 0; j <= lags; ++j) est.values[j] = r(est.lags[j]);
    est.dt = dt;
    est.n_samples = n_samples;
    attach_bartlett_ci(est, 0.95);
    return est;
}

}  // namespace

TEST_CASE("autocorrelation: AR(1) oracle within the Bartlett band") {
    const double rho = 0.8;
    const int n = 100000;
    AutocorrEstimate est = autocorrelation(ar1_series(rho, n, 3), 1.0, 20.0);
    attach_bartlett_ci(est, 0.95);
    CHECK(est.values[0] == 1.0);
    for (int k = 1; k <= 20; ++k)
        CHECK(std::abs(est.values[k] - std::pow(rho, k)) <=
              1.5 * est.ci_halfwidths[k]);
}

TEST_CASE("autocorrelation: centering kills a constant offset") {
    Rng rng(5);
    ArrayXd x(50000);
    for (int i = 0; i < x.size(); ++i) x[i] = 10.0 + rng.next_normal();
    const AutocorrEstimate est = autocorrelation(x, 1.0, 10.0);
    for (int k = 1; k <= 10; ++k) CHECK(std::abs(est.values[k]) < 0.02);
}

TEST_CASE("autocorrelation: affine invariance and preconditions") {
    const ArrayXd x = ar1_series(0.5, 20000, 9);
    const AutocorrEstimate a = autocorrelation(x, 0.5, 5.0);
    const AutocorrEstimate b = autocorrelation(ArrayXd(3.5 * x + 2.0), 0.5, 5.0);
    for (Eigen::Index j = 0; j < a.values.size(); ++j)
        CHECK(std::abs(a.values[j] - b.values[j]) < 1e-12);
    CHECK_THROWS_AS((void)autocorrelation(x, 0.5, 20000.0), std::domain_error);
}

TEST_CASE("increment variance is exactly 1 - R") {
    AutocorrEstimate est = autocorrelation(ar1_series(0.9, 50000, 2), 1.0, 30.0);
    const IncrementVariance v = increment_variance(est);
    CHECK(v.values[0] == 0.0);
    for (Eigen::Index j = 0; j < v.values.size(); ++j)
        CHECK(v.values[j] + est.values[j] == 1.0);  // exact arithmetic identity
}

TEST_CASE("increment variance initial slopes for the two covariance families") {
    // Exponential covariance: slope 1; gaussian covariance: slope 2.
    const auto exp_est = exact_estimate(
        [](double d) { return std::exp(-2.0 * d); }, 1e-4, 4000, 1000000);
    const auto gauss_est = exact_estimate(
        [](double d) { return std::exp(-kPi * d * d); }, 1e-4, 4000, 1000000);
    const double s1 =
        initial_loglog_slope(increment_variance(exp_est), 1e-4, 1e-2);
    const double s2 =
        initial_loglog_slope(increment_variance(gauss_est), 1e-4, 1e-2);
    CHECK(s1 == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s2 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("relaxation_time recovers tau from exact covariances") {
    const double tau0 = 0.7;
    const auto exp_est = exact_estimate(
        [&](double d) { return std::exp(-2.0 * d / tau0); }, tau0 / 400.0, 4000,
        1000000);
    const RelaxationEstimate r1 = relaxation_time(exp_est);
    CHECK(r1.tau == doctest::Approx(tau0).epsilon(0.02));
    CHECK(r1.truncation_lag <= exp_est.lags[exp_est.lags.size() - 1]);

    const auto gauss_est = exact_estimate(
        [&](double d) { return std::exp(-kPi * (d / tau0) * (d / tau0)); },
        tau0 / 400.0, 4000, 1000000);
    const RelaxationEstimate r2 = relaxation_time(gauss_est);
    CHECK(r2.tau == doctest::Approx(tau0).epsilon(0.02));
}

TEST_CASE("relaxation_time: integration-incomplete carries the partial value") {
    // R stays at 0.5: never enters the zero band.
    const auto est = exact_estimate([](double) { return 0.5; }, 0.01, 100, 10000);
    CHECK_THROWS_AS((void)relaxation_time(est), IncompleteIntegrationError);
    try {
        (void)relaxation_time(est);
    } catch (const IncompleteIntegrationError& e) {
        CHECK(e.partial == doctest::Approx(2.0 * 0.5 * 1.0).epsilon(0.02));
    }
    AutocorrEstimate no_ci = est;
    no_ci.ci_halfwidths.resize(0);
    CHECK_THROWS_AS((void)relaxation_time(no_ci), std::invalid_argument);
}

TEST_CASE("bartlett halfwidths: white-noise closed form and scaling") {
    AutocorrEstimate est;
    est.lags = ArrayXd::LinSpaced(11, 0.0, 10.0);
    est.values = ArrayXd::Zero(11);
    est.values[0] = 1.0;
    est.dt = 1.0;
    est.n_samples = 400;
    const ArrayXd hw = bartlett_halfwidths(est, 0.95);
    for (int j = 1; j <= 10; ++j)
        CHECK(hw[j] == doctest::Approx(1.959963984540054 / 20.0).epsilon(1e-12));
    est.n_samples = 1600;  // 4x samples -> half width
    const ArrayXd hw4 = bartlett_halfwidths(est, 0.95);
    CHECK(hw4[5] == doctest::Approx(0.5 * hw[5]).epsilon(1e-12));
    CHECK_THROWS_AS((void)bartlett_halfwidths(est, 1.0), std::domain_error);

    // widths are nondecreasing in lag once R is nonzero
    AutocorrEstimate ar = autocorrelation(ar1_series(0.9, 100000, 4), 1.0, 30.0);
    const ArrayXd hww = bartlett_halfwidths(ar, 0.95);
    for (int j = 2; j < 31; ++j) CHECK(hww[j] >= hww[j - 1]);
}

TEST_CASE("bartlett band coverage on AR(1) (reduced replication count)") {
    const double rho = 0.9;
    const int n = 100000, reps = 200, lag = 10;
    const double truth = std::pow(rho, lag);
    int covered = 0;
#pragma omp parallel for reduction(+ : covered) schedule(dynamic)
    for (int r = 0; r < reps; ++r) {
        AutocorrEstimate est =
            autocorrelation(ar1_series(rho, n, 1000 + r), 1.0, 15.0);
        const ArrayXd hw = bartlett_halfwidths(est, 0.95);
        if (std::abs(est.values[lag] - truth) <= hw[lag]) ++covered;
    }
    const double coverage = double(covered) / reps;
    CHECK(coverage >= 0.90);
    CHECK(coverage <= 0.99);
}

TEST_CASE("cross_correlation") {
    const ArrayXd a = ar1_series(0.5, 40000, 1);
    std::vector<ArrayXd> same = {a, a};
    const CrossCorrelation c1 = cross_correlation(same);
    CHECK(c1.corr(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

    // Independent filtered paths: small off-diagonals.
    std::vector<ArrayXd> indep;
    FilteredNoiseSpec spec;
    spec.kernel = gaussian_kernel();
    spec.tau = 1.0;
    spec.dt = 0.05;
    spec.horizon = 2000.0;
    for (std::uint64_t s = 0; s < 4; ++s) {
        spec.seed = 100 + s;
        indep.push_back(simulate_path(spec).values);
    }
    const CrossCorrelation c2 = cross_correlation(indep);
    for (int i = 0; i < 4; ++i) {
        CHECK(c2.corr(i, i) == 1.0);
        for (int j = i + 1; j < 4; ++j) CHECK(std::abs(c2.corr(i, j)) < 0.05);
    }
    CHECK(c2.degenerate.empty());

    std::vector<ArrayXd> degen = {a, ArrayXd::Zero(a.size())};
    const CrossCorrelation c3 = cross_correlation(degen);
    CHECK(c3.degenerate == std::vector<int>{1});
    CHECK(c3.corr(0, 1) == 0.0);

    std::vector<ArrayXd> uneven = {a, a.head(10)};
    CHECK_THROWS_AS((void)cross_correlation(uneven), std::invalid_argument);
}

TEST_CASE("fit_beta: exact self-fits on the analytic covariances") {
    const std::vector<double> grid = {0.0,  0.25, 0.5,  1.0, 2.0,
                                      4.0,  8.0,  16.0, 32.0,
                                      std::numeric_limits<double>::infinity()};
    const double tau0 = 1.0;
    RelaxationEstimate tau{tau0, 3.0, "exact"};

    const auto gauss_est = exact_estimate(
        [](double d) { return std::exp(-kPi * d * d); }, 0.01, 300, 100000);
    const KernelFit f1 = fit_beta(gauss_est, tau, grid);
    CHECK(std::isinf(f1.beta_star));
    CHECK(f1.objective <= 1e-18);

    const auto exp_est = exact_estimate(
        [](double d) { return std::exp(-2.0 * d); }, 0.01, 300, 100000);
    const KernelFit f0 = fit_beta(exp_est, tau, grid);
    CHECK(f0.beta_star == 0.0);

    AutocorrEstimate below;
    below.lags = ArrayXd::LinSpaced(3, 0.0, 2.0);
    below.values.resize(3);
    below.values << 1.0, 0.05, 0.01;
    below.values[0] = 0.05;  // force nothing above threshold
    below.dt = 1.0;
    below.n_samples = 100;
    CHECK_THROWS_AS((void)fit_beta(below, tau, grid), std::domain_error);
    CHECK_THROWS_AS((void)fit_beta(exp_est, tau, {}), std::invalid_argument);
}

TEST_CASE("fit_beta: recovers the smoothness class of a simulated path") {
    FilteredNoiseSpec spec;
    spec.kernel = matern_kernel(1.0);
    spec.tau = 1.0;
    spec.dt = 0.02;
    spec.horizon = 4000.0;
    spec.seed = 12;
    const SamplePath p = simulate_path(spec);
    AutocorrEstimate est = autocorrelation(p, 5.0);
    attach_bartlett_ci(est, 0.95);
    const RelaxationEstimate tau = relaxation_time(est);
    CHECK(tau.tau == doctest::Approx(1.0).epsilon(0.10));
    const KernelFit fit = fit_beta(
        est, tau, {0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0,
                   std::numeric_limits<double>::infinity()});
    CHECK(fit.beta_star >= 0.5);
    CHECK(fit.beta_star <= 2.0);
}

TEST_CASE("gaussianity_check on iid normals") {
    Rng rng(8);
    ArrayXd x(100000);
    for (int i = 0; i < x.size(); ++i) x[i] = 2.5 * rng.next_normal();
    const GaussianityStats g = gaussianity_check(x);
    CHECK(std::abs(g.skewness) < 0.03);
    CHECK(std::abs(g.excess_kurtosis) < 0.06);
    CHECK(g.ks_statistic < 0.005);
    CHECK_THROWS_AS((void)gaussianity_check(ArrayXd::Zero(100)), std::domain_error);

    // A clearly non-gaussian series is flagged by the same statistics.
    ArrayXd y(20000);
    for (int i = 0; i < y.size(); ++i) {
        const double g1 = rng.next_normal();
        y[i] = g1 * g1 * g1;
    }
    const GaussianityStats ng = gaussianity_check(y);
    CHECK(std::abs(ng.excess_kurtosis) > 1.0);
}
