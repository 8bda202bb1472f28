#pragma once

#include <cstdint>
#include <vector>

#include "filtnoise/common.hpp"
#include "filtnoise/kernels.hpp"
#include "filtnoise/noise.hpp"

namespace filtnoise {

/// One divergence-free Fourier mode. basis_mode_eval returns the
/// L2([0,2pi]^2)-normalized form (k_perp/|k|) cos(k.x) / (sqrt(2) pi).
/// Field synthesis uses the mean-square-normalized variant sqrt(2) cos(k.x)
/// k_perp/|k| (unit space-average of |e|^2), which is what makes the ring
/// sum Q approach pi k_max I; see q_matrix.
struct BasisMode {
    Vec2i k;
    enum class Parity { Cos, Sin } parity = Parity::Cos;
};

Vec2 basis_mode_eval(const BasisMode& mode, const Vec2& x);

/// Band of unit-width spectral bins: |k| in (k_max - hw + 1/2, k_max + hw -
/// 1/2], i.e. 2*half_width - 1 integer bins centered at k_max. half_width = 1
/// is the thin ring with about 2 pi k_max modes.
struct ShellSpec {
    int k_max = 32;
    int half_width = 1;

    /// Half-plane wavevectors (kx > 0, or kx = 0 and ky > 0) in the band.
    std::vector<Vec2i> wavevectors() const;
    void validate() const;
};

/// Shell-restricted synthetic velocity field: independent filtered-noise
/// coefficients on one cosine and one sine mode per half-plane wavevector,
/// common amplitude sqrt(energy / n_modes). `energy` is the stationary
/// mean-square velocity E[|u(x,t)|^2].
struct SyntheticField {
    std::vector<Vec2i> wavevectors;
    double amplitude = 0.0;
    double energy = 0.0;
    Kernel kernel;
    double tau = 0.0;
    std::uint64_t seed = 0;

    int n_modes() const { return 2 * static_cast<int>(wavevectors.size()); }
};

SyntheticField build_umax(double e_kmax, const ShellSpec& shell,
                          const Kernel& kernel, double tau, std::uint64_t seed);

/// Time-sampled realization of the field: one path per mode on a uniform
/// grid, linear interpolation in t. Immutable; shared across tracer threads.
class FieldRealization {
public:
    FieldRealization(const SyntheticField& field, double dt, double horizon,
                     std::uint64_t realization_seed);

    Vec2 velocity(const Vec2& x, double t) const;
    /// Velocity with externally supplied coefficients (one per mode,
    /// cos/sin interleaved); used by tests with frozen coefficients.
    static Vec2 velocity_with_coefficients(const SyntheticField& field,
                                           const ArrayXd& coeffs, const Vec2& x);

    double dt() const { return dt_; }
    const SyntheticField& field() const { return field_; }
    const SamplePath& path(int wavevector_idx, BasisMode::Parity p) const;

private:
    SyntheticField field_;
    double dt_;
    std::vector<SamplePath> cos_paths_, sin_paths_;
    std::vector<Vec2> unit_perp_;
};

/// White-noise approximation: per step of size dt the mode coefficient is
/// sqrt(tau/dt) N(0,1), independent across modes and steps. Requires a
/// shell-constant tau by construction.
struct WhiteNoiseField {
    SyntheticField base;
};
WhiteNoiseField white_noise_field(const SyntheticField& field);

/// Coefficient of mode m (cos/sin interleaved) at step `step`, for one
/// realization stream.
double white_noise_coefficient(const WhiteNoiseField& f, std::uint64_t stream,
                               int mode_index, long step, double dt);

/// Exact mode-sum Q(x) = sum e_k(x) (x) e_k(x) over the shell
/// (mean-square-normalized modes), with the isotropic approximation
/// pi k_max I and their relative Frobenius deviation.
struct QMatrixReport {
    Mat2 q;
    Mat2 isotropic;
    double rel_frobenius_dev;
};
QMatrixReport q_matrix(const ShellSpec& shell, const Vec2& x);

}  // namespace filtnoise
