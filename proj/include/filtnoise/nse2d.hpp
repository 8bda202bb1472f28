#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "filtnoise/common.hpp"
#include "filtnoise/fft.hpp"

namespace filtnoise {

/// White-in-time forcing on the integer ring k_f - bandwidth <= |k| <= k_f +
/// bandwidth. epsilon is the mean energy injection rate; the per-mode noise
/// variance is derived from it.
struct ForcingSpec {
    int k_f = 32;
    int bandwidth = 1;
    double epsilon = 1.0;
};

enum class Integrator { Rk3, ImplicitMidpoint };

struct SolverConfig {
    int n = 256;            ///< grid size, divisible by 4
    double nu = 1.5e-3;     ///< kinematic viscosity
    double alpha = 2.0;     ///< friction damping
    double dt = 2e-3;
    ForcingSpec forcing;
    bool forcing_enabled = true;
    std::uint64_t seed = 1;
    Integrator integrator = Integrator::Rk3;
    double cfl_limit = 0.7;

    void validate() const;  ///< throws on invalid combinations
};

/// Spectral vorticity coefficients on an n x n grid (Fourier-series
/// convention: physical field = sum of omega_hat(k) e^{i k.x}).
struct VorticityState {
    ArrayXXcd omega_hat;
    double time = 0.0;

    int n() const { return static_cast<int>(omega_hat.rows()); }
};

/// Real Fourier component of the vorticity at one wavevector, sampled in time.
struct ModeSeries {
    Vec2i k;
    ArrayXd samples;
    double dt_sample = 0.0;
};

VorticityState zero_state(int n);
VorticityState random_smooth_state(int n, std::uint64_t seed, double k0 = 4.0,
                                   double rms_vorticity = 1.0);

double enstrophy(const VorticityState& s);
double kinetic_energy(const VorticityState& s);
double max_hermitian_asymmetry(const VorticityState& s);
/// max_k |k . u_hat(k)| over modes, normalized by the rms velocity
/// coefficient; exactly 0 up to roundoff for the streamfunction inversion.
double max_spectral_divergence(const VorticityState& s);

/// Shell-binned kinetic-energy spectrum; unit-width bins centered at
/// integers, E_bin = sum over round(|k|) == bin of |omega_hat|^2 / (2 |k|^2).
struct EnergySpectrum {
    ArrayXd k;  ///< bin centers 1, 2, ...
    ArrayXd e;
    double total() const { return e.sum(); }
};
EnergySpectrum energy_spectrum(const VorticityState& s);

/// Fully dealiased (2/3-rule) pseudo-spectral solver for the stochastically
/// forced vorticity equation. A solver instance owns the FFT plans and the
/// forcing step counter; states pass through by reference.
class Nse2dSolver {
public:
    explicit Nse2dSolver(const SolverConfig& config);

    const SolverConfig& config() const { return config_; }

    /// Advances one dt (deterministic substeps + one stochastic increment).
    /// Throws BlowUpError on non-finite coefficients.
    void step(VorticityState& state);

    long step_index() const { return step_; }
    void set_step_index(long s) { step_ = s; }

    /// CFL number max|u| dt / dx observed during the last step.
    double last_cfl() const { return last_cfl_; }
    long cfl_violations() const { return cfl_violations_; }

    /// Velocity field on a 2x oversampled physical grid with bicubic
    /// interpolation; built on demand (one padded transform).
    struct Sampler {
        int n_fine = 0;
        ArrayXXd u, v;
        Vec2 operator()(const Vec2& x) const;
        double max_speed() const;
    };
    Sampler make_sampler(const VorticityState& state);

    /// Direct Fourier summation at arbitrary points (exact, O(modes) each).
    static std::vector<Vec2> velocity_direct(const VorticityState& state,
                                             std::span<const Vec2> positions);

    /// Spectral evaluation of u at off-grid points: direct summation when at
    /// most 64 modes are active, else bicubic on the oversampled grid.
    /// Positions are wrapped periodically.
    std::vector<Vec2> velocity_at(const VorticityState& state,
                                  std::span<const Vec2> positions);

private:
    void nonlinear_term(const ArrayXXcd& w, ArrayXXcd& out, bool track_cfl);
    void apply_forcing(VorticityState& state);
    void hermitianize(ArrayXXcd& w) const;
    void step_rk3(VorticityState& state);
    void step_midpoint(VorticityState& state);

    SolverConfig config_;
    Fft2 fft_;
    std::unique_ptr<Fft2> fft_fine_;  // for make_sampler
    ArrayXd wavenumbers_;             // index -> signed k
    ArrayXXd ksq_;
    ArrayXXcd dealias_;               // 1 inside the retained band, else 0
    ArrayXXcd efull_, ehalf_, ehalf_inv_, linear_;
    std::vector<Vec2i> forced_modes_;  // half-plane ring
    double sigma_f_ = 0.0;
    long step_ = 0;
    double last_cfl_ = 0.0;
    long cfl_violations_ = 0;
    ArrayXXcd p1_, p2_, a_, b_, nl_, w1_, w2_, scratch_;
};

/// Relative enstrophy drift |Z_end - Z_0| / Z_0 over `steps` inviscid,
/// unforced steps. Requires nu = alpha = 0 and forcing disabled; the zero
/// field returns 0.
double conservation_probe(VorticityState state, const SolverConfig& config,
                          int steps);

/// Records Re omega_hat(k) every sample_every accepted steps.
class ModeRecorder {
public:
    ModeRecorder(std::vector<Vec2i> modes, int sample_every, double dt);
    void observe(const VorticityState& state, long step);
    std::vector<ModeSeries> take();
    const std::vector<Vec2i>& modes() const { return modes_; }

private:
    std::vector<Vec2i> modes_;
    int sample_every_;
    double dt_;
    std::vector<std::vector<double>> buffers_;
};

/// Running time average of the energy spectrum.
class SpectrumAccumulator {
public:
    void observe(const VorticityState& state);
    EnergySpectrum mean() const;
    long count() const { return count_; }

private:
    ArrayXd sum_;
    ArrayXd k_;
    long count_ = 0;
};

}  // namespace filtnoise
