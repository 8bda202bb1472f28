#pragma once

#include <vector>

#include "filtnoise/common.hpp"
#include "filtnoise/noise.hpp"

namespace filtnoise {

/// Normalized autocorrelation estimate: values[0] = 1 exactly.
struct AutocorrEstimate {
    ArrayXd lags;            ///< time units, strictly increasing from 0
    ArrayXd values;          ///< R(lag)
    long n_samples = 0;
    double dt = 0.0;         ///< lag step
    ArrayXd ci_halfwidths;   ///< empty until bartlett_ci is applied
};

struct RelaxationEstimate {
    double tau = 0.0;
    double truncation_lag = 0.0;  ///< where the integration stopped
    std::string rule;
};

struct KernelFit {
    double beta_star = 0.0;  ///< infinity() for the Gaussian kernel
    double objective = 0.0;
    std::vector<double> grid;
};

struct GaussianityStats {
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_statistic = 0.0;  ///< KS distance to N(0, sigma_hat^2)
};

/// Mean-removed, biased (1/N) lagged-product estimator normalized by lag 0.
/// Requires at least 10 * max_lag_time / dt samples.
AutocorrEstimate autocorrelation(const ArrayXd& samples, double dt,
                                 double max_lag_time);
AutocorrEstimate autocorrelation(const SamplePath& path, double max_lag_time);

/// V(lag) = 1 - R(lag), exactly, per lag.
struct IncrementVariance {
    ArrayXd lags;
    ArrayXd values;
};
IncrementVariance increment_variance(const AutocorrEstimate& est);

/// Bartlett large-sample half-widths
/// z_(1+l)/2 * sqrt((1 + 2 sum_{j<n} R(j)^2) / N), nondecreasing in lag.
ArrayXd bartlett_halfwidths(const AutocorrEstimate& est, double level);

/// Convenience: compute and attach the half-widths.
void attach_bartlett_ci(AutocorrEstimate& est, double level);

/// tau = 2 * trapezoid integral of R up to the first lag where |R| enters
/// the Bartlett zero band. Requires attached half-widths. Throws
/// IncompleteIntegrationError (carrying the partial value) when R never
/// enters the band within the available lags.
RelaxationEstimate relaxation_time(const AutocorrEstimate& est,
                                   const std::string& rule = "bartlett-zero");

/// Pearson correlation matrix of contemporaneous samples. Zero-variance
/// series are flagged: their off-diagonal entries are set to 0 and the index
/// recorded in `degenerate`.
struct CrossCorrelation {
    Eigen::MatrixXd corr;
    std::vector<int> degenerate;
};
CrossCorrelation cross_correlation(const std::vector<ArrayXd>& series);

/// Least-squares fit of the Bessel-K covariance family to R over the lags
/// with R > 0.1; ties break toward larger beta, where candidates within one
/// noise quantum of the minimum (from the attached Bartlett widths) count as
/// tied. Grid entries may include infinity() for the Gaussian member.
KernelFit fit_beta(const AutocorrEstimate& est, const RelaxationEstimate& tau,
                   const std::vector<double>& grid);

/// Standardized moments plus Kolmogorov-Smirnov distance to a centered
/// Gaussian with variance estimated from the data.
GaussianityStats gaussianity_check(const ArrayXd& samples);

/// Log-log LSQ slope of V over the lags with v_lo <= V <= v_hi.
/// Returns NaN when fewer than 3 lags fall in the window.
double initial_loglog_slope(const IncrementVariance& v, double v_lo, double v_hi);

/// Log-log LSQ slope of (t, y) over t in [t_lo, t_hi], ignoring y <= 0.
double loglog_slope(const ArrayXd& t, const ArrayXd& y, double t_lo, double t_hi);

}  // namespace filtnoise
