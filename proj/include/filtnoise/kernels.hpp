#pragma once

#include <functional>
#include <string>
#include <vector>

#include "filtnoise/common.hpp"

namespace filtnoise {

/// Covariance function C(u) of a filtered-noise process in lag units of tau.
/// Normalized so that C(0) = 1 and int_0^inf C = 1/2. Even by construction:
/// operator() folds negative lags.
struct CovarianceFunction {
    enum class Form { Analytic, NumericSelfConvolution };

    std::function<double(double)> value;  ///< evaluated at |u| >= 0
    Form form = Form::Analytic;
    double support = 5.0;  ///< |u| beyond which C is treated as 0

    double operator()(double u) const {
        u = std::abs(u);
        return u >= support ? 0.0 : value(u);
    }
};

/// Mollifier kernel: nonnegative, even, with unit L1 and L2 norms and
/// finite first absolute moment M. Immutable after construction.
struct Kernel {
    std::function<double(double)> value;  ///< theta evaluated at |x| >= 0
    double support_radius = 0.0;          ///< mass outside is < 1e-10
    double first_abs_moment = 0.0;        ///< M = int |x| theta(x) dx
    CovarianceFunction covariance;        ///< C = theta * theta
    std::string label;

    double operator()(double x) const {
        x = std::abs(x);
        return x >= support_radius ? 0.0 : value(x);
    }
};

/// Smoothness parameters of the Bessel-K kernel family.
struct MaternParams {
    double beta = 0.0;        ///< smoothness, >= 0; infinity = Gaussian limit
    double gamma_beta = 0.0;  ///< scale 2^(2b+1) G(b+1/2) G(b+1) / G(2b+1/2)
};

MaternParams matern_params(double beta);

/// theta(x) = sqrt(2) exp(-2 pi x^2); covariance C(u) = exp(-pi u^2).
Kernel gaussian_kernel();

/// Bessel-K kernel of smoothness beta >= 0; beta = 0 gives exponential
/// covariance exp(-2|u|), beta = infinity dispatches to gaussian_kernel().
/// For beta = 0 the kernel value at x = 0 is +infinity (log-divergent).
Kernel matern_kernel(double beta);

/// Rescale an arbitrary symmetric probability density (unit integral over
/// [-support, support]) into an admissible kernel: theta(x) = density(x/A)/A
/// with A = int density^2, so that both norms are 1. The covariance is a
/// tabulated numeric self-convolution.
Kernel kernel_from_density(const std::function<double(double)>& density,
                           double support);

struct KernelCheck {
    std::string name;
    double residual;   ///< measured deviation from the required value
    double tolerance;
    bool pass;
};

struct ValidationReport {
    std::vector<KernelCheck> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

/// Checks nonnegativity, symmetry, unit L1/L2 norms, and finiteness of M.
/// Failures are report entries, never exceptions.
ValidationReport validate_kernel(const Kernel& k, double tol);

/// Gamma(s) = int_0^s C(r) dr, monotone with limit 1/2.
double gamma_integral(const CovarianceFunction& c, double s);

/// Numeric self-convolution (theta * theta)(u) by adaptive quadrature.
double self_convolution_at(const std::function<double(double)>& theta,
                           double support, double u);

/// Tabulated self-convolution covariance on a uniform lag grid
/// (step 1e-3 kernel units, cubic interpolation between nodes).
CovarianceFunction numeric_self_convolution(
    const std::function<double(double)>& theta, double support);

}  // namespace filtnoise
