#include "filtnoise/nse2d.hpp"

#include <cmath>
#include <iostream>

#include "filtnoise/rng.hpp"

namespace filtnoise {

namespace {

inline int signed_wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

inline int wrap_index(int k, int n) { return k >= 0 ? k : k + n; }

std::uint64_t mode_key(std::uint64_t seed, int kx, int ky, long step) {
    const auto ux = static_cast<std::uint64_t>(static_cast<std::int64_t>(kx) + (1 << 20));
    const auto uy = static_cast<std::uint64_t>(static_cast<std::int64_t>(ky) + (1 << 20));
    return mix_key(seed, (ux << 32) | uy, static_cast<std::uint64_t>(step));
}

}  // namespace

void SolverConfig::validate() const {
    if (n < 8 || n % 4 != 0)
        throw std::invalid_argument("SolverConfig: n must be >= 8 and divisible by 4");
    if (!(nu >= 0.0) || !(alpha >= 0.0))
        throw std::invalid_argument("SolverConfig: nu and alpha must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("SolverConfig: dt must be positive");
    if (forcing_enabled) {
        if (forcing.k_f - forcing.bandwidth <= 0)
            throw std::invalid_argument("SolverConfig: forcing ring reaches k = 0");
        if (forcing.k_f + forcing.bandwidth >= n / 3)
            throw std::invalid_argument("SolverConfig: forcing ring outside the dealiased band");
    }
}

VorticityState zero_state(int n) {
    VorticityState s;
    s.omega_hat = ArrayXXcd::Zero(n, n);
    return s;
}

VorticityState random_smooth_state(int n, std::uint64_t seed, double k0,
                                   double rms_vorticity) {
    VorticityState s = zero_state(n);
    Rng rng(seed);
    const int kc = n / 3;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int kx = signed_wavenumber(i, n);
            const int ky = signed_wavenumber(j, n);
            if ((kx == 0 && ky == 0) || std::abs(kx) > kc || std::abs(ky) > kc)
                continue;
            if (!(kx > 0 || (kx == 0 && ky > 0))) continue;  // half-plane
            const double kk = std::sqrt(double(kx * kx + ky * ky));
            if (kk > n / 8.0) continue;
            const double amp = std::exp(-(kk / k0) * (kk / k0));
            const Complex c(amp * rng.next_normal(), amp * rng.next_normal());
            s.omega_hat(i, j) = c;
            s.omega_hat(wrap_index(-kx, n), wrap_index(-ky, n)) = std::conj(c);
        }
    }
    const double rms = std::sqrt(2.0 * enstrophy(s));
    if (rms > 0.0) s.omega_hat *= rms_vorticity / rms;
    return s;
}

double enstrophy(const VorticityState& s) {
    return 0.5 * s.omega_hat.abs2().sum();
}

double kinetic_energy(const VorticityState& s) {
    const int n = s.n();
    double e = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int kx = signed_wavenumber(i, n);
            const int ky = signed_wavenumber(j, n);
            const double kk = double(kx * kx + ky * ky);
            if (kk > 0.0) e += 0.5 * std::norm(s.omega_hat(i, j)) / kk;
        }
    }
    return e;
}

double max_hermitian_asymmetry(const VorticityState& s) {
    const int n = s.n();
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Complex a = s.omega_hat(i, j);
            const Complex b = s.omega_hat((n - i) % n, (n - j) % n);
            worst = std::max(worst, std::abs(a - std::conj(b)));
        }
    return worst;
}

double max_spectral_divergence(const VorticityState& s) {
    const int n = s.n();
    double worst = 0.0, rms = 0.0;
    long cnt = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int kx = signed_wavenumber(i, n);
            const int ky = signed_wavenumber(j, n);
            const double kk = double(kx * kx + ky * ky);
            if (kk == 0.0) continue;
            const Complex psi = s.omega_hat(i, j) / kk;
            const Complex u = Complex(0, 1) * double(ky) * psi;
            const Complex v = Complex(0, -1) * double(kx) * psi;
            worst = std::max(worst, std::abs(double(kx) * u + double(ky) * v));
            rms += std::norm(u) + std::norm(v);
            ++cnt;
        }
    rms = std::sqrt(rms / std::max(1L, cnt));
    return rms > 0.0 ? worst / rms : 0.0;
}

EnergySpectrum energy_spectrum(const VorticityState& s) {
    const int n = s.n();
    const int max_bin = static_cast<int>(std::lround(std::sqrt(2.0) * (n / 2))) + 1;
    EnergySpectrum out;
    out.k = ArrayXd::LinSpaced(max_bin, 1.0, double(max_bin));
    out.e = ArrayXd::Zero(max_bin);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int kx = signed_wavenumber(i, n);
            const int ky = signed_wavenumber(j, n);
            const double kk = double(kx * kx + ky * ky);
            if (kk == 0.0) continue;
            const auto bin = static_cast<int>(std::lround(std::sqrt(kk)));
            if (bin >= 1 && bin <= max_bin)
                out.e[bin - 1] += 0.5 * std::norm(s.omega_hat(i, j)) / kk;
        }
    return out;
}

Nse2dSolver::Nse2dSolver(const SolverConfig& config)
    : config_(config), fft_(config.n) {
    config_.validate();
    const int n = config_.n;
    wavenumbers_.resize(n);
    for (int i = 0; i < n; ++i) wavenumbers_[i] = signed_wavenumber(i, n);

    ksq_.resize(n, n);
    dealias_.resize(n, n);
    const int kc = n / 3;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumbers_[i];
            const double ky = wavenumbers_[j];
            ksq_(i, j) = kx * kx + ky * ky;
            dealias_(i, j) =
                (std::abs(kx) <= kc && std::abs(ky) <= kc) ? 1.0 : 0.0;
        }
    dealias_(0, 0) = 0.0;  // zero-mean constraint

    const ArrayXXd l = -(config_.nu * ksq_ + config_.alpha);
    linear_ = l.cast<Complex>();
    efull_ = (l * config_.dt).exp().cast<Complex>();
    ehalf_ = (l * (0.5 * config_.dt)).exp().cast<Complex>();
    ehalf_inv_ = (-l * (0.5 * config_.dt)).exp().cast<Complex>();

    if (config_.forcing_enabled) {
        const auto& f = config_.forcing;
        double inv_ksq_sum = 0.0;
        for (int ky = -(f.k_f + f.bandwidth); ky <= f.k_f + f.bandwidth; ++ky)
            for (int kx = 0; kx <= f.k_f + f.bandwidth; ++kx) {
                if (!(kx > 0 || (kx == 0 && ky > 0))) continue;
                const double kk = std::sqrt(double(kx * kx + ky * ky));
                if (kk < f.k_f - f.bandwidth || kk > f.k_f + f.bandwidth) continue;
                forced_modes_.push_back({kx, ky});
                inv_ksq_sum += 1.0 / double(kx * kx + ky * ky);
            }
        if (forced_modes_.empty())
            throw std::invalid_argument("Nse2dSolver: forcing ring is empty");
        sigma_f_ = std::sqrt(f.epsilon / inv_ksq_sum);
    }

    p1_.resize(n, n); p2_.resize(n, n); a_.resize(n, n); b_.resize(n, n);
    nl_.resize(n, n); w1_.resize(n, n); w2_.resize(n, n); scratch_.resize(n, n);
}

void Nse2dSolver::nonlinear_term(const ArrayXXcd& w, ArrayXXcd& out,
                                 bool track_cfl) {
    const int n = config_.n;
    // Pack (u, v) and (w_x, w_y) into two complex fields: one backward
    // transform each recovers both real components.
    for (int j = 0; j < n; ++j) {
        const double ky = wavenumbers_[j];
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumbers_[i];
            const double kk = ksq_(i, j);
            const Complex wh = w(i, j);
            const Complex psi = kk > 0.0 ? wh / kk : Complex(0, 0);
            // u + i v with u = i ky psi, v = -i kx psi
            p1_(i, j) = Complex(kx, ky) * psi;
            // w_x + i w_y with w_x = i kx w, w_y = i ky w
            p2_(i, j) = Complex(-ky, kx) * wh;
        }
    }
    fft_.backward(p1_, a_);
    fft_.backward(p2_, b_);

    double umax = 0.0;
    auto* pa = a_.data();
    auto* pb = b_.data();
    auto* ps = scratch_.data();
    const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    for (std::size_t m = 0; m < nn; ++m) {
        const double u = pa[m].real();
        const double v = pa[m].imag();
        if (track_cfl) umax = std::max({umax, std::abs(u), std::abs(v)});
        ps[m] = Complex(u * pb[m].real() + v * pb[m].imag(), 0.0);
    }
    if (track_cfl) {
        if (!std::isfinite(umax))
            throw BlowUpError(step_, "nse2d: non-finite velocity at step " +
                                         std::to_string(step_));
        last_cfl_ = umax * config_.dt * double(n) / kTwoPi;
        if (last_cfl_ > config_.cfl_limit) {
            ++cfl_violations_;
            if (cfl_violations_ <= 3)
                std::cerr << "[filtnoise] warning: CFL " << last_cfl_
                          << " exceeds limit " << config_.cfl_limit
                          << " at step " << step_ << "\n";
        }
    }
    fft_.forward(scratch_, out);
    out *= -dealias_;
}

void Nse2dSolver::hermitianize(ArrayXXcd& w) const {
    const int n = config_.n;
    for (int j = 0; j < n; ++j) {
        const int jm = (n - j) % n;
        for (int i = 0; i < n; ++i) {
            const int im = (n - i) % n;
            if (j > jm || (j == jm && i > im)) continue;
            const Complex avg = 0.5 * (w(i, j) + std::conj(w(im, jm)));
            w(i, j) = avg;
            w(im, jm) = std::conj(avg);
        }
    }
    w(0, 0) = Complex(0, 0);
}

void Nse2dSolver::apply_forcing(VorticityState& state) {
    const int n = config_.n;
    const double amp = sigma_f_ * std::sqrt(0.5 * config_.dt);
    for (const auto& k : forced_modes_) {
        double g1 = 0.0, g2 = 0.0;
        normal_pair_at(mode_key(config_.seed, k.x(), k.y(), step_), g1, g2);
        const Complex inc = amp * Complex(g1, g2);
        state.omega_hat(wrap_index(k.x(), n), wrap_index(k.y(), n)) += inc;
        state.omega_hat(wrap_index(-k.x(), n), wrap_index(-k.y(), n)) +=
            std::conj(inc);
    }
}

void Nse2dSolver::step_rk3(VorticityState& state) {
    const double dt = config_.dt;
    ArrayXXcd& w0 = state.omega_hat;
    nonlinear_term(w0, nl_, true);
    w1_ = efull_ * (w0 + dt * nl_);
    nonlinear_term(w1_, nl_, false);
    w2_ = 0.75 * ehalf_ * w0 + 0.25 * ehalf_inv_ * (w1_ + dt * nl_);
    nonlinear_term(w2_, nl_, false);
    w0 = (1.0 / 3.0) * efull_ * w0 + (2.0 / 3.0) * ehalf_ * (w2_ + dt * nl_);
}

void Nse2dSolver::step_midpoint(VorticityState& state) {
    const double dt = config_.dt;
    const ArrayXXcd w0 = state.omega_hat;
    ArrayXXcd w = w0;
    const double norm0 = std::sqrt(w0.abs2().sum());
    const double tol = 1e-13 * std::max(norm0, 1e-300);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        w2_ = 0.5 * (w0 + w);
        nonlinear_term(w2_, nl_, it == 0);
        w1_ = w0 + dt * (linear_ * w2_ + nl_);
        const double delta = std::sqrt((w1_ - w).abs2().sum());
        w = w1_;
        if (delta <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged && norm0 > 0.0)
        throw BlowUpError(step_, "nse2d: implicit midpoint failed to converge");
    state.omega_hat = w;
}

void Nse2dSolver::step(VorticityState& state) {
    if (state.n() != config_.n)
        throw std::invalid_argument("Nse2dSolver::step: state size mismatch");
    if (config_.integrator == Integrator::Rk3)
        step_rk3(state);
    else
        step_midpoint(state);
    if (config_.forcing_enabled) apply_forcing(state);
    hermitianize(state.omega_hat);
    state.omega_hat *= dealias_;
    state.time += config_.dt;
    ++step_;
    if (!std::isfinite(state.omega_hat(1, 0).real()))
        throw BlowUpError(step_, "nse2d: blow-up at step " + std::to_string(step_));
}

Nse2dSolver::Sampler Nse2dSolver::make_sampler(const VorticityState& state) {
    const int n = config_.n;
    const int nf = 2 * n;
    if (!fft_fine_) fft_fine_ = std::make_unique<Fft2>(nf);

    ArrayXXcd packed = ArrayXXcd::Zero(nf, nf);
    for (int j = 0; j < n; ++j) {
        const double ky = wavenumbers_[j];
        const int jf = wrap_index(static_cast<int>(ky), nf);
        for (int i = 0; i < n; ++i) {
            const double kx = wavenumbers_[i];
            const double kk = ksq_(i, j);
            if (kk == 0.0) continue;
            const Complex psi = state.omega_hat(i, j) / kk;
            const Complex u = Complex(0, ky) * psi;
            const Complex v = Complex(0, -kx) * psi;
            packed(wrap_index(static_cast<int>(kx), nf), jf) = u + Complex(0, 1) * v;
        }
    }
    ArrayXXcd fine;
    fft_fine_->backward(packed, fine);

    Sampler s;
    s.n_fine = nf;
    s.u.resize(nf, nf);
    s.v.resize(nf, nf);
    for (int j = 0; j < nf; ++j)
        for (int i = 0; i < nf; ++i) {
            s.u(i, j) = fine(i, j).real();
            s.v(i, j) = fine(i, j).imag();
        }
    return s;
}

namespace {
inline void catmull_rom_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2.0 * t2 - t);
    w[1] = 0.5 * (3.0 * t3 - 5.0 * t2 + 2.0);
    w[2] = 0.5 * (-3.0 * t3 + 4.0 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}
}  // namespace

Vec2 Nse2dSolver::Sampler::operator()(const Vec2& x) const {
    const int nf = n_fine;
    const double h = kTwoPi / double(nf);
    double gx = x.x() / h, gy = x.y() / h;
    gx -= std::floor(gx / nf) * nf;
    gy -= std::floor(gy / nf) * nf;
    const int i0 = static_cast<int>(gx);
    const int j0 = static_cast<int>(gy);
    double wx[4], wy[4];
    catmull_rom_weights(gx - i0, wx);
    catmull_rom_weights(gy - j0, wy);
    double su = 0.0, sv = 0.0;
    for (int b = 0; b < 4; ++b) {
        const int j = (j0 + b - 1 + nf) % nf;
        double ru = 0.0, rv = 0.0;
        for (int a = 0; a < 4; ++a) {
            const int i = (i0 + a - 1 + nf) % nf;
            ru += wx[a] * u(i, j);
            rv += wx[a] * v(i, j);
        }
        su += wy[b] * ru;
        sv += wy[b] * rv;
    }
    return {su, sv};
}

double Nse2dSolver::Sampler::max_speed() const {
    return std::sqrt((u.square() + v.square()).maxCoeff());
}

std::vector<Vec2> Nse2dSolver::velocity_direct(const VorticityState& state,
                                               std::span<const Vec2> positions) {
    const int n = state.n();
    struct Term {
        double kx, ky;
        Complex u, v;
    };
    std::vector<Term> terms;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Complex wh = state.omega_hat(i, j);
            if (wh == Complex(0, 0)) continue;
            const double kx = signed_wavenumber(i, n);
            const double ky = signed_wavenumber(j, n);
            const double kk = kx * kx + ky * ky;
            if (kk == 0.0) continue;
            const Complex psi = wh / kk;
            terms.push_back({kx, ky, Complex(0, ky) * psi, Complex(0, -kx) * psi});
        }
    std::vector<Vec2> out(positions.size());
    for (std::size_t p = 0; p < positions.size(); ++p) {
        Complex su(0, 0), sv(0, 0);
        for (const auto& t : terms) {
            const double phase = t.kx * positions[p].x() + t.ky * positions[p].y();
            const Complex e(std::cos(phase), std::sin(phase));
            su += t.u * e;
            sv += t.v * e;
        }
        out[p] = {su.real(), sv.real()};
    }
    return out;
}

std::vector<Vec2> Nse2dSolver::velocity_at(const VorticityState& state,
                                           std::span<const Vec2> positions) {
    long active = 0;
    for (int j = 0; j < state.n(); ++j)
        for (int i = 0; i < state.n(); ++i)
            if (state.omega_hat(i, j) != Complex(0, 0)) ++active;
    if (active <= 64) return velocity_direct(state, positions);
    const Sampler s = make_sampler(state);
    std::vector<Vec2> out(positions.size());
    for (std::size_t p = 0; p < positions.size(); ++p) out[p] = s(positions[p]);
    return out;
}

double conservation_probe(VorticityState state, const SolverConfig& config,
                          int steps) {
    if (config.nu != 0.0 || config.alpha != 0.0 || config.forcing_enabled)
        throw std::invalid_argument(
            "conservation_probe: requires nu = alpha = 0 and forcing disabled");
    const double z0 = enstrophy(state);
    if (z0 == 0.0) return 0.0;
    Nse2dSolver solver(config);
    for (int s = 0; s < steps; ++s) solver.step(state);
    return std::abs(enstrophy(state) - z0) / z0;
}

ModeRecorder::ModeRecorder(std::vector<Vec2i> modes, int sample_every, double dt)
    : modes_(std::move(modes)), sample_every_(sample_every), dt_(dt) {
    buffers_.resize(modes_.size());
}

void ModeRecorder::observe(const VorticityState& state, long step) {
    if (step % sample_every_ != 0) return;
    const int n = state.n();
    const int kc = n / 3;
    for (std::size_t m = 0; m < modes_.size(); ++m) {
        const auto& k = modes_[m];
        if (std::abs(k.x()) > kc || std::abs(k.y()) > kc)
            throw std::domain_error("ModeRecorder: mode outside the resolved band");
        buffers_[m].push_back(
            state.omega_hat(wrap_index(k.x(), n), wrap_index(k.y(), n)).real());
    }
}

std::vector<ModeSeries> ModeRecorder::take() {
    std::vector<ModeSeries> out;
    for (std::size_t m = 0; m < modes_.size(); ++m) {
        ModeSeries s;
        s.k = modes_[m];
        s.dt_sample = dt_ * sample_every_;
        s.samples = Eigen::Map<ArrayXd>(buffers_[m].data(),
                                        static_cast<long>(buffers_[m].size()));
        out.push_back(std::move(s));
    }
    return out;
}

void SpectrumAccumulator::observe(const VorticityState& state) {
    EnergySpectrum es = energy_spectrum(state);
    if (count_ == 0) {
        sum_ = es.e;
        k_ = es.k;
    } else {
        sum_ += es.e;
    }
    ++count_;
}

EnergySpectrum SpectrumAccumulator::mean() const {
    EnergySpectrum out;
    out.k = k_;
    out.e = count_ > 0 ? ArrayXd(sum_ / double(count_)) : sum_;
    return out;
}

}  // namespace filtnoise
