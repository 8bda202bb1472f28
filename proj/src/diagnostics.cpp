#include "filtnoise/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "filtnoise/fft.hpp"
#include "filtnoise/kernels.hpp"
#include "filtnoise/special.hpp"

namespace filtnoise {

AutocorrEstimate autocorrelation(const ArrayXd& samples, double dt,
                                 double max_lag_time) {
    const auto n = static_cast<long>(samples.size());
    const auto max_lag = static_cast<int>(std::floor(max_lag_time / dt));
    if (max_lag < 1) throw std::domain_error("autocorrelation: max_lag < 1 sample");
    if (n < 10 * max_lag)
        throw std::domain_error("autocorrelation: series shorter than 10 * max_lag");
    AutocorrEstimate est;
    ArrayXd cov = autocovariance_fft(samples, max_lag);
    const double c0 = cov[0];
    if (!(c0 > 0.0)) throw std::domain_error("autocorrelation: zero-variance series");
    est.values = cov / c0;
    est.values[0] = 1.0;
    est.lags = ArrayXd::LinSpaced(max_lag + 1, 0.0, dt * max_lag);
    est.n_samples = n;
    est.dt = dt;
    return est;
}

AutocorrEstimate autocorrelation(const SamplePath& path, double max_lag_time) {
    return autocorrelation(path.values, path.dt, max_lag_time);
}

IncrementVariance increment_variance(const AutocorrEstimate& est) {
    return IncrementVariance{est.lags, 1.0 - est.values};
}

ArrayXd bartlett_halfwidths(const AutocorrEstimate& est, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::domain_error("bartlett_halfwidths: level outside (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const auto m = est.values.size();
    ArrayXd hw(m);
    hw[0] = 0.0;
    double sumsq = 0.0;  // sum_{j=1}^{n-1} R(j)^2 for the lag-n band
    for (Eigen::Index j = 1; j < m; ++j) {
        hw[j] = z * std::sqrt((1.0 + 2.0 * sumsq) /
                              static_cast<double>(est.n_samples));
        sumsq += est.values[j] * est.values[j];
    }
    return hw;
}

void attach_bartlett_ci(AutocorrEstimate& est, double level) {
    est.ci_halfwidths = bartlett_halfwidths(est, level);
}

RelaxationEstimate relaxation_time(const AutocorrEstimate& est,
                                   const std::string& rule) {
    if (est.ci_halfwidths.size() != est.values.size())
        throw std::invalid_argument("relaxation_time: Bartlett CI not attached");
    if (rule != "bartlett-zero")
        throw std::invalid_argument("relaxation_time: unknown rule " + rule);
    double integral = 0.0;
    for (Eigen::Index j = 1; j < est.values.size(); ++j) {
        integral += 0.5 * est.dt * (est.values[j - 1] + est.values[j]);
        if (std::abs(est.values[j]) <= est.ci_halfwidths[j]) {
            RelaxationEstimate out;
            out.tau = 2.0 * integral;
            out.truncation_lag = est.lags[j];
            out.rule = rule;
            return out;
        }
    }
    throw IncompleteIntegrationError(
        2.0 * integral, "relaxation_time: R never entered the Bartlett zero band");
}

CrossCorrelation cross_correlation(const std::vector<ArrayXd>& series) {
    const auto m = static_cast<int>(series.size());
    for (const auto& s : series)
        if (s.size() != series.front().size())
            throw std::invalid_argument("cross_correlation: unequal lengths");
    CrossCorrelation out;
    out.corr = Eigen::MatrixXd::Identity(m, m);
    std::vector<double> mean(m), sd(m);
    for (int i = 0; i < m; ++i) {
        mean[i] = series[i].mean();
        sd[i] = std::sqrt((series[i] - mean[i]).square().mean());
        if (!(sd[i] > 0.0)) out.degenerate.push_back(i);
    }
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            double r = 0.0;
            if (sd[i] > 0.0 && sd[j] > 0.0)
                r = ((series[i] - mean[i]) * (series[j] - mean[j])).mean() /
                    (sd[i] * sd[j]);
            out.corr(i, j) = r;
            out.corr(j, i) = r;
        }
    }
    return out;
}

KernelFit fit_beta(const AutocorrEstimate& est, const RelaxationEstimate& tau,
                   const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("fit_beta: empty grid");
    std::vector<double> sorted = grid;
    std::sort(sorted.begin(), sorted.end());  // infinity sorts last

    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < est.values.size(); ++j)
        if (est.values[j] > 0.1) keep.push_back(j);
    if (keep.empty())
        throw std::domain_error("fit_beta: no lags with R > 0.1");

    std::vector<double> objectives;
    double obj_min = std::numeric_limits<double>::infinity();
    for (double beta : sorted) {
        const CovarianceFunction cov = matern_kernel(beta).covariance;
        double obj = 0.0;
        for (Eigen::Index j : keep) {
            const double d = est.values[j] - cov(est.lags[j] / tau.tau);
            obj += d * d;
        }
        objectives.push_back(obj);
        obj_min = std::min(obj_min, obj);
    }

    // Ties break toward larger beta. With noisy estimates, "tie" means
    // within one noise quantum of the objective: members of the family
    // closer than ~4 sigma per lag cannot be distinguished, and the
    // simplest-model rule picks the smoothest of them.
    double sigma_sq = 0.0;
    if (est.ci_halfwidths.size() == est.values.size()) {
        for (Eigen::Index j : keep) {
            const double s = est.ci_halfwidths[j] / 1.959963984540054;
            sigma_sq += s * s;
        }
        sigma_sq /= double(keep.size());
    }
    KernelFit fit;
    fit.grid = sorted;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (objectives[i] <= obj_min + 16.0 * sigma_sq) {
            fit.beta_star = sorted[i];
            fit.objective = objectives[i];
        }
    }
    return fit;
}

GaussianityStats gaussianity_check(const ArrayXd& samples) {
    const auto n = static_cast<double>(samples.size());
    if (samples.size() < 10000)
        throw std::domain_error("gaussianity_check: need at least 1e4 samples");
    const double mean = samples.mean();
    const ArrayXd c = samples - mean;
    const double m2 = c.square().mean();
    const double m3 = c.cube().mean();
    const double m4 = c.square().square().mean();
    GaussianityStats g;
    g.skewness = m3 / std::pow(m2, 1.5);
    g.excess_kurtosis = m4 / (m2 * m2) - 3.0;

    std::vector<double> sorted(samples.data(), samples.data() + samples.size());
    std::sort(sorted.begin(), sorted.end());
    const double sigma = std::sqrt(samples.square().mean());  // zero-mean model
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double phi = normal_cdf(sorted[i] / sigma);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max({d, std::abs(phi - lo), std::abs(hi - phi)});
    }
    g.ks_statistic = d;
    return g;
}

double loglog_slope(const ArrayXd& t, const ArrayXd& y, double t_lo, double t_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi || !(y[i] > 0.0) || !(t[i] > 0.0)) continue;
        const double lx = std::log(t[i]);
        const double ly = std::log(y[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

double initial_loglog_slope(const IncrementVariance& v, double v_lo, double v_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (Eigen::Index i = 1; i < v.lags.size(); ++i) {
        if (v.values[i] < v_lo || v.values[i] > v_hi) continue;
        const double lx = std::log(v.lags[i]);
        const double ly = std::log(v.values[i]);
        sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        ++n;
    }
    if (n < 3) return std::numeric_limits<double>::quiet_NaN();
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace filtnoise
