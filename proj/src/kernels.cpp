#include "filtnoise/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "filtnoise/quadrature.hpp"
#include "filtnoise/special.hpp"

namespace filtnoise {

namespace {

constexpr double kLagGridStep = 1e-3;

double abs_moment(const std::function<double(double)>& theta, double support) {
    return 2.0 * quad::integrate([&](double x) { return x * theta(x); }, 0.0,
                                 support, 1e-12);
}

/// Catmull-Rom interpolation on a uniform table over [0, (n-1)h],
/// clamped at the left edge (even extension) and 0 beyond the right edge.
struct LagTable {
    std::vector<double> v;
    double h;

    double operator()(double u) const {
        const double g = u / h;
        const long n = static_cast<long>(v.size());
        if (g >= static_cast<double>(n - 1)) return 0.0;
        long i = static_cast<long>(g);
        const double t = g - static_cast<double>(i);
        auto at = [&](long j) {
            if (j < 0) j = -j;  // even extension through u = 0
            return j < n ? v[static_cast<std::size_t>(j)] : 0.0;
        };
        const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
        return p1 + 0.5 * t * (p2 - p0 +
                               t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                    t * (3.0 * (p1 - p2) + p3 - p0)));
    }
};

}  // namespace

double self_convolution_at(const std::function<double(double)>& theta,
                           double support, double u) {
    u = std::abs(u);
    if (u >= 2.0 * support) return 0.0;
    // Overlap of theta(u - r) and theta(r): r in [u - R, R]. Split at the
    // potential singular points r = 0 and r = u of either factor.
    const double lo = u - support;
    const double hi = support;
    auto f = [&](double r) { return theta(std::abs(u - r)) * theta(std::abs(r)); };
    std::vector<double> pts = {lo, hi};
    if (0.0 > lo && 0.0 < hi) pts.push_back(0.0);
    if (u > lo && u < hi) pts.push_back(u);
    std::sort(pts.begin(), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        s += quad::integrate(f, pts[i], pts[i + 1], 1e-11);
    return s;
}

CovarianceFunction numeric_self_convolution(
    const std::function<double(double)>& theta, double support) {
    const double span = 2.0 * support;
    const auto n = static_cast<std::size_t>(std::ceil(span / kLagGridStep)) + 2;
    auto table = std::make_shared<LagTable>();
    table->h = kLagGridStep;
    table->v.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        table->v[i] = self_convolution_at(theta, support,
                                          static_cast<double>(i) * kLagGridStep);
    CovarianceFunction c;
    c.form = CovarianceFunction::Form::NumericSelfConvolution;
    c.support = span;
    c.value = [table](double u) { return (*table)(u); };
    return c;
}

Kernel gaussian_kernel() {
    Kernel k;
    k.label = "gaussian";
    k.value = [](double x) { return std::sqrt(2.0) * std::exp(-2.0 * kPi * x * x); };
    // exp(-2 pi x^2) < 1e-16 beyond here; mass outside is far below 1e-10.
    k.support_radius = 2.4215;
    k.first_abs_moment = std::sqrt(2.0) / kTwoPi;
    k.covariance.form = CovarianceFunction::Form::Analytic;
    k.covariance.value = [](double u) { return std::exp(-kPi * u * u); };
    k.covariance.support = 3.5;  // exp(-pi u^2) < 1e-16 beyond
    return k;
}

MaternParams matern_params(double beta) {
    if (beta < 0.0 || std::isnan(beta))
        throw std::domain_error("matern_params: beta must be >= 0");
    MaternParams p;
    p.beta = beta;
    if (std::isinf(beta)) return p;
    p.gamma_beta = std::exp((2.0 * beta + 1.0) * std::log(2.0) +
                            std::lgamma(beta + 0.5) + std::lgamma(beta + 1.0) -
                            std::lgamma(2.0 * beta + 0.5));
    return p;
}

Kernel matern_kernel(double beta) {
    const MaternParams p = matern_params(beta);
    if (std::isinf(beta)) return gaussian_kernel();

    const double gb = p.gamma_beta;
    const double kernel_pref =
        std::exp((beta + 1.0) * std::log(2.0) - 0.5 * std::log(kPi) +
                 std::lgamma(beta + 1.0) - std::lgamma(2.0 * beta + 0.5));
    const double nu_cov = 2.0 * beta + 0.5;
    const double cov_pref =
        std::exp(0.5 * std::log(2.0 / kPi) + std::lgamma(beta + 0.5) +
                 std::lgamma(beta + 1.0) - std::lgamma(2.0 * beta + 0.5) -
                 std::lgamma(2.0 * beta + 1.0));

    Kernel k;
    k.label = "matern:" + std::to_string(beta);
    k.value = [kernel_pref, gb, beta](double x) {
        return kernel_pref * scaled_bessel_k(beta, gb * std::abs(x));
    };
    k.covariance.form = CovarianceFunction::Form::Analytic;
    k.covariance.value = [cov_pref, gb, nu_cov](double u) {
        return cov_pref * scaled_bessel_k(nu_cov, gb * std::abs(u));
    };

    // K_beta decays like exp(-gb x): march out until the tail bound
    // theta(R) * (1 + 1/(gb R)) / gb drops below the mass budget.
    double r = (beta + 1.0) / gb;
    while (k.value(r) * (1.0 + 1.0 / (gb * r)) / gb > 0.5e-10) r *= 1.25;
    k.support_radius = r;

    double rc = (nu_cov + 1.0) / gb;
    while (k.covariance.value(rc) * (1.0 + 1.0 / (gb * rc)) / gb > 1e-13) rc *= 1.25;
    k.covariance.support = rc;

    k.first_abs_moment = abs_moment(k.value, k.support_radius);
    return k;
}

Kernel kernel_from_density(const std::function<double(double)>& density,
                           double support) {
    const double tol = 1e-4;
    const double mass =
        2.0 * quad::integrate([&](double x) { return density(x); }, 0.0, support, 1e-10);
    if (std::abs(mass - 1.0) > tol)
        throw std::invalid_argument("kernel_from_density: density integral " +
                                    std::to_string(mass) + " is not 1");
    // Symmetry probe at a few abscissae.
    for (double x : {0.1 * support, 0.37 * support, 0.8 * support})
        if (std::abs(density(x) - density(-x)) >
            tol * (1.0 + std::abs(density(x))))
            throw std::invalid_argument("kernel_from_density: density is not even");

    const double a =
        2.0 * quad::integrate([&](double x) { return density(x) * density(x); },
                              0.0, support, 1e-12);
    Kernel k;
    k.label = "custom";
    k.value = [density, a](double x) { return density(x / a) / a; };
    k.support_radius = support * a;
    k.first_abs_moment = abs_moment(k.value, k.support_radius);
    k.covariance = numeric_self_convolution(k.value, k.support_radius);
    return k;
}

ValidationReport validate_kernel(const Kernel& k, double tol) {
    if (!(tol > 0.0)) throw std::domain_error("validate_kernel: tol must be > 0");
    ValidationReport rep;
    const double r = k.support_radius;

    double min_val = std::numeric_limits<double>::infinity();
    double max_asym = 0.0;
    for (int i = 1; i <= 400; ++i) {
        const double x = r * static_cast<double>(i) / 401.0;
        min_val = std::min(min_val, k(x));
        max_asym = std::max(max_asym, std::abs(k(x) - k(-x)));
    }
    rep.checks.push_back({"nonnegativity", std::max(0.0, -min_val), tol,
                          min_val >= -tol});
    rep.checks.push_back({"symmetry", max_asym, 1e-12, max_asym <= 1e-12});

    const double l1 = 2.0 * quad::integrate([&](double x) { return k(x); }, 0.0, r,
                                            0.1 * tol);
    rep.checks.push_back({"l1_norm", std::abs(l1 - 1.0), tol,
                          std::abs(l1 - 1.0) <= tol});
    const double l2sq =
        2.0 * quad::integrate([&](double x) { return k(x) * k(x); }, 0.0, r,
                              0.1 * tol);
    rep.checks.push_back({"l2_norm", std::abs(l2sq - 1.0), tol,
                          std::abs(l2sq - 1.0) <= tol});
    const double m = abs_moment([&](double x) { return k(x); }, r);
    rep.checks.push_back({"first_moment_finite", std::abs(m - k.first_abs_moment),
                          tol, std::isfinite(m) && m > 0.0});
    return rep;
}

double gamma_integral(const CovarianceFunction& c, double s) {
    if (s < 0.0) throw std::domain_error("gamma_integral: s must be >= 0");
    if (s == 0.0) return 0.0;
    const double hi = std::min(s, c.support);
    return quad::integrate([&](double r) { return c(r); }, 0.0, hi, 1e-10);
}

}  // namespace filtnoise
