#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace filtnoise {

using Eigen::ArrayXd;
using Eigen::ArrayXXcd;
using Eigen::ArrayXXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec2i = Eigen::Vector2i;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Raised when a simulation produces non-finite values.
struct BlowUpError : std::runtime_error {
    long step;
    explicit BlowUpError(long step_, const std::string& what_)
        : std::runtime_error(what_), step(step_) {}
};

/// Raised when an integral cannot be completed under the requested rule.
/// Carries the partial value accumulated so far.
struct IncompleteIntegrationError : std::runtime_error {
    double partial;
    explicit IncompleteIntegrationError(double partial_, const std::string& what_)
        : std::runtime_error(what_), partial(partial_) {}
};

}  // namespace filtnoise
