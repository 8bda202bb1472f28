#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "filtnoise/common.hpp"

namespace filtnoise {

/// Adaptive Gauss-Kronrod (7,15) quadrature on a finite interval.
/// Endpoint singularities are tolerated as long as they are integrable:
/// the Kronrod nodes are interior, so f is never evaluated at a or b.
namespace quad {

namespace detail {
// QUADPACK dqk15 abscissae/weights (positive half).
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * xgk[i]);
        fv[14 - i] = f(c + h * xgk[i]);
    }
    fv[7] = f(c);
    double resk = wgk[7] * fv[7];
    double resg = wg[3] * fv[7];
    for (int i = 0; i < 7; ++i) resk += wgk[i] * (fv[i] + fv[14 - i]);
    for (int i = 0; i < 3; ++i) resg += wg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

template <typename F>
inline double adapt(const F& f, double a, double b, double tol, int depth) {
    double v, e;
    gk15(f, a, b, v, e);
    // Below this width the nodes start rounding onto the endpoints; a
    // singular cell this small contributes O(width * |log width|), which is
    // under any tolerance this library uses.
    const double floor_w = 1024.0 * std::numeric_limits<double>::epsilon() *
                           (std::abs(a) + std::abs(b) + 1.0);
    if ((e <= tol && std::isfinite(v)) || depth <= 0 || (b - a) <= floor_w)
        return std::isfinite(v) ? v : 0.0;
    const double c = 0.5 * (a + b);
    return adapt(f, a, c, 0.5 * tol, depth - 1) +
           adapt(f, c, b, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Integrate f over [a, b] to absolute tolerance tol.
template <typename F>
inline double integrate(const F& f, double a, double b, double tol = 1e-10,
                        int max_depth = 48) {
    if (a == b) return 0.0;
    return detail::adapt(f, a, b, tol, max_depth);
}

/// Integrate with interior split points (for known kinks/singularities).
template <typename F>
inline double integrate_split(const F& f, std::initializer_list<double> pts,
                              double tol = 1e-10) {
    double s = 0.0;
    const double* it = pts.begin();
    for (const double* q = it + 1; q != pts.end(); ++it, ++q)
        s += integrate(f, *it, *q, tol);
    return s;
}

}  // namespace quad
}  // namespace filtnoise
