#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "filtnoise/common.hpp"

namespace filtnoise {

/// s^nu * K_nu(s) for s >= 0, finite limit 2^(nu-1) Gamma(nu) at s = 0
/// (nu > 0). std::cyl_bessel_k overflows for large nu at tiny s even though
/// the product stays bounded; the small-s series covers that corner.
inline double scaled_bessel_k(double nu, double s) {
    if (s < 0.0) throw std::domain_error("scaled_bessel_k: s < 0");
    if (nu <= 0.0) {
        if (nu < 0.0) throw std::domain_error("scaled_bessel_k: nu < 0");
        // nu == 0: plain K_0, log-divergent at 0.
        return s == 0.0 ? std::numeric_limits<double>::infinity()
                        : std::cyl_bessel_k(0.0, s);
    }
    const double limit = std::exp((nu - 1.0) * std::log(2.0) + std::lgamma(nu));
    if (s == 0.0) return limit;
    const double k = std::cyl_bessel_k(nu, s);
    if (std::isfinite(k)) {
        const double p = std::pow(s, nu);
        if (p > 0.0 && std::isfinite(p * k)) return p * k;
    }
    // Tiny s: two-term ascending series of s^nu K_nu(s).
    const double corr = nu > 1.0 ? 1.0 - s * s / (4.0 * (nu - 1.0)) : 1.0;
    return limit * corr;
}

/// Inverse standard normal CDF (Wichura's algorithm AS 241, PPND16).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p outside (0,1)");
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258) * r +
                  3.64784832476320460504) * r + 5.76949722146069140550) * r +
                4.63033784615654529590) * r + 1.42343711074968357734) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940) * r +
                2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580) * r +
                5.46378491116411436990) * r + 6.65790464350110377720) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

/// Standard normal CDF.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

}  // namespace filtnoise
