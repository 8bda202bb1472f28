#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "filtnoise/rng.hpp"
#include "filtnoise/synthfield.hpp"

using namespace filtnoise;

TEST_CASE("basis modes: unit L2 norm, orthogonality, zero divergence") {
    const BasisMode m1{{3, 4}, BasisMode::Parity::Cos};
    const BasisMode m2{{3, 4}, BasisMode::Parity::Sin};
    const BasisMode m3{{5, -2}, BasisMode::Parity::Cos};

    // 256^2 tensor quadrature over the torus
    const int ng = 256;
    const double h = kTwoPi / ng;
    double n1 = 0, n2 = 0, d12 = 0, d13 = 0;
    for (int j = 0; j < ng; ++j)
        for (int i = 0; i < ng; ++i) {
            const Vec2 x(i * h, j * h);
            const Vec2 a = basis_mode_eval(m1, x);
            const Vec2 b = basis_mode_eval(m2, x);
            const Vec2 c = basis_mode_eval(m3, x);
            n1 += a.squaredNorm();
            n2 += b.squaredNorm();
            d12 += a.dot(b);
            d13 += a.dot(c);
        }
    const double cell = h * h;
    CHECK(n1 * cell == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(n2 * cell == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(d12 * cell) < 1e-10);
    CHECK(std::abs(d13 * cell) < 1e-10);

    // divergence vanishes identically: central finite difference probe
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 x(kTwoPi * rng.next_uniform(), kTwoPi * rng.next_uniform());
        const double eps = 1e-5;
        const double div =
            (basis_mode_eval(m1, {x.x() + eps, x.y()}).x() -
             basis_mode_eval(m1, {x.x() - eps, x.y()}).x() +
             basis_mode_eval(m1, {x.x(), x.y() + eps}).y() -
             basis_mode_eval(m1, {x.x(), x.y() - eps}).y()) /
            (2 * eps);
        CHECK(std::abs(div) < 1e-8);
    }
    CHECK_THROWS_AS((void)basis_mode_eval({{0, 0}, BasisMode::Parity::Cos}, {0, 0}),
                    std::domain_error);
}

TEST_CASE("shell wavevectors form the unit-width ring") {
    ShellSpec shell{32, 1};
    const auto wv = shell.wavevectors();
    // roughly pi * k_max half-plane vectors on the unit ring
    CHECK(double(wv.size()) == doctest::Approx(kPi * 32).epsilon(0.08));
    for (const auto& k : wv) {
        const double r = k.cast<double>().norm();
        CHECK(r > 31.5);
        CHECK(r <= 32.5);
        CHECK((k.x() > 0 || (k.x() == 0 && k.y() > 0)));
    }
    // wider band: three unit bins
    ShellSpec wide{32, 2};
    const auto wv2 = wide.wavevectors();
    CHECK(wv2.size() > 2.5 * wv.size());

    ShellSpec bad{1, 1};
    CHECK_THROWS_AS((void)bad.wavevectors(), std::domain_error);
}

TEST_CASE("build_umax: amplitude normalization and determinism") {
    ShellSpec shell{8, 1};
    const Kernel g = gaussian_kernel();
    const SyntheticField f = build_umax(2.0, shell, g, 0.1, 5);
    CHECK(f.amplitude ==
          doctest::Approx(std::sqrt(2.0 / double(f.n_modes()))).epsilon(1e-12));
    CHECK(f.energy == 2.0);

    const FieldRealization r1(f, 0.01, 1.0, 0);
    const FieldRealization r2(f, 0.01, 1.0, 0);
    const FieldRealization r3(f, 0.01, 1.0, 1);
    const Vec2 x(1.0, 2.0);
    CHECK((r1.velocity(x, 0.5) - r2.velocity(x, 0.5)).norm() == 0.0);
    CHECK((r1.velocity(x, 0.5) - r3.velocity(x, 0.5)).norm() > 0.0);

    CHECK_THROWS_AS((void)build_umax(1.0, shell, g, -1.0, 0), std::domain_error);
}

TEST_CASE("single-mode shell with frozen coefficient reproduces the basis mode") {
    SyntheticField f;
    f.wavevectors = {{3, 4}};
    f.energy = 1.0;
    f.amplitude = std::sqrt(1.0 / 2.0);
    ArrayXd coeffs(2);
    coeffs << 1.0, 0.0;  // cosine coefficient frozen at 1
    Rng rng(9);
    for (int t = 0; t < 20; ++t) {
        const Vec2 x(kTwoPi * rng.next_uniform(), kTwoPi * rng.next_uniform());
        const Vec2 u = FieldRealization::velocity_with_coefficients(f, coeffs, x);
        // mean-square-normalized mode: sqrt(2) cos(k.x) k_perp/|k|
        const double phase = 3 * x.x() + 4 * x.y();
        const Vec2 expected = f.amplitude * std::sqrt(2.0) * std::cos(phase) *
                              Vec2(-4.0 / 5.0, 3.0 / 5.0);
        CHECK((u - expected).norm() < 1e-14);
    }
}

TEST_CASE("variance oracle: sampled mean square velocity equals the energy input") {
    // Brute-force Monte Carlo over (x, t) against the analytic mode sum.
    ShellSpec shell{8, 1};
    const double energy = 1.7, tau = 0.05;
    const SyntheticField f = build_umax(energy, shell, gaussian_kernel(), tau, 99);
    double mean_sq = 0.0;
    long count = 0;
    Rng rng(4);
    for (int rep = 0; rep < 6; ++rep) {
        const FieldRealization real(f, tau / 20.0, 60.0 * tau, 1000 + rep);
        for (int s = 0; s < 400; ++s) {
            const Vec2 x(kTwoPi * rng.next_uniform(), kTwoPi * rng.next_uniform());
            const double t = 55.0 * tau * rng.next_uniform();
            mean_sq += real.velocity(x, t).squaredNorm();
            ++count;
        }
    }
    mean_sq /= double(count);
    CHECK(mean_sq == doctest::Approx(energy).epsilon(0.05));
}

TEST_CASE("space stationarity of single-point statistics") {
    ShellSpec shell{8, 1};
    const SyntheticField f = build_umax(1.0, shell, gaussian_kernel(), 0.05, 21);
    const Vec2 probes[3] = {{0.0, 0.0}, {2.1, 0.7}, {5.9, 3.3}};
    double ms[3] = {0, 0, 0};
    for (int rep = 0; rep < 40; ++rep) {
        const FieldRealization real(f, 0.0025, 3.0, 500 + rep);
        for (int s = 0; s < 60; ++s) {
            const double t = 0.05 * s;
            for (int p = 0; p < 3; ++p)
                ms[p] += real.velocity(probes[p], t).squaredNorm();
        }
    }
    for (int p = 0; p < 3; ++p) ms[p] /= 40.0 * 60.0;
    CHECK(ms[0] == doctest::Approx(ms[1]).epsilon(0.15));
    CHECK(ms[1] == doctest::Approx(ms[2]).epsilon(0.15));
}

TEST_CASE("realized fields are divergence-free (finite-difference probe)") {
    ShellSpec shell{6, 1};
    const SyntheticField f = build_umax(1.0, shell, gaussian_kernel(), 0.1, 13);
    const FieldRealization real(f, 0.005, 1.0, 0);
    Rng rng(6);
    double grad_rms = 0.0;
    double worst_div = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Vec2 x(kTwoPi * rng.next_uniform(), kTwoPi * rng.next_uniform());
        const double t = rng.next_uniform();
        const double eps = 1e-5;
        const Vec2 uxp = real.velocity({x.x() + eps, x.y()}, t);
        const Vec2 uxm = real.velocity({x.x() - eps, x.y()}, t);
        const Vec2 uyp = real.velocity({x.x(), x.y() + eps}, t);
        const Vec2 uym = real.velocity({x.x(), x.y() - eps}, t);
        const double ux = (uxp.x() - uxm.x()) / (2 * eps);
        const double vy = (uyp.y() - uym.y()) / (2 * eps);
        const double uy = (uyp.x() - uym.x()) / (2 * eps);
        const double vx = (uxp.y() - uxm.y()) / (2 * eps);
        worst_div = std::max(worst_div, std::abs(ux + vy));
        grad_rms += ux * ux + uy * uy + vx * vx + vy * vy;
    }
    grad_rms = std::sqrt(grad_rms / 50.0);
    CHECK(worst_div < 1e-8 * grad_rms);
}

TEST_CASE("q_matrix isotropization") {
    Rng rng(77);
    // thin ring at k_max = 32: within 10% of pi k_max I everywhere
    ShellSpec shell{32, 1};
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 x(kTwoPi * rng.next_uniform(), kTwoPi * rng.next_uniform());
        const QMatrixReport rep = q_matrix(shell, x);
        CHECK(rep.rel_frobenius_dev < 0.1);
        CHECK(rep.isotropic(0, 0) == doctest::Approx(kPi * 32));
    }
    // trace identity: trace Q = number of modes, exactly at every x
    const QMatrixReport rep = q_matrix(shell, {1.0, 1.0});
    const auto n_modes = 2.0 * double(shell.wavevectors().size());
    CHECK(rep.q.trace() == doctest::Approx(n_modes).epsilon(1e-12));
    // off-diagonal isotropy of the x-averaged Q (Q is x-independent here)
    CHECK(std::abs(rep.q(0, 1)) < 0.01 * rep.q(0, 0));

    // convergence trend: deviation shrinks with the ring size. Individual
    // rings fluctuate with the lattice count (Gauss circle problem), so the
    // comparison averages a few neighboring rings.
    auto band_avg = [](int klo, int khi) {
        double s = 0.0;
        for (int k = klo; k <= khi; ++k)
            s += q_matrix({k, 1}, {0.5, 0.5}).rel_frobenius_dev;
        return s / double(khi - klo + 1);
    };
    CHECK(band_avg(60, 68) < band_avg(6, 10));
}

TEST_CASE("white-noise field coefficients") {
    ShellSpec shell{8, 1};
    const SyntheticField f = build_umax(1.0, shell, gaussian_kernel(), 0.05, 3);
    const WhiteNoiseField w = white_noise_field(f);
    const double dt = 1e-3;

    // per-step variance tau/dt, integral variance tau T
    const int n_steps = 20000;
    double sum = 0.0, sumsq = 0.0, integral = 0.0;
    for (long s = 0; s < n_steps; ++s) {
        const double c = white_noise_coefficient(w, 0, 0, s, dt);
        sum += c;
        sumsq += c * c;
        integral += c * dt;
    }
    const double var = sumsq / n_steps - (sum / n_steps) * (sum / n_steps);
    CHECK(var == doctest::Approx(f.tau / dt).epsilon(0.05));
    // integrated coefficient: variance tau * T over independent streams
    double acc = 0.0;
    const int n_streams = 4000;
    const int steps_short = 200;
    for (int st = 0; st < n_streams; ++st) {
        double i2 = 0.0;
        for (long s = 0; s < steps_short; ++s)
            i2 += white_noise_coefficient(w, 100 + st, 1, s, dt) * dt;
        acc += i2 * i2;
    }
    const double t_short = steps_short * dt;
    CHECK(acc / n_streams == doctest::Approx(f.tau * t_short).epsilon(0.06));

    SyntheticField degenerate = f;
    degenerate.tau = 0.0;
    CHECK_THROWS_AS((void)white_noise_field(degenerate), std::domain_error);
}
