#include <doctest.h>

#include <cmath>
#include <numbers>

#include "polyproc/error.hpp"
#include "polyproc/spectral.hpp"
#include "test_support.hpp"

using namespace polyproc;
using std::numbers::pi;

TEST_CASE("model fields") {
    const auto m = TruncatedSpectralModel::create(5, 0.5, 10);
    CHECK(m.rotation_rates[0] == doctest::Approx(2 * pi));
    CHECK(m.rotation_rates[4] == doctest::Approx(10 * pi));
    CHECK(m.q_decay[0] == 0.25);
    CHECK(m.q_decay[2] == 1.0 / 16.0);
    CHECK(m.t_grid.dt == 0.05);
    CHECK_THROWS_AS(TruncatedSpectralModel::create(0, 0.5, 10), DomainError);
}

TEST_CASE("drift integral examples") {
    const auto at_one = drift_integral(1.0, 50);
    for (const auto& c : at_one.components) CHECK(c == Complex(0.0));
    CHECK(at_one.norm == 0.0);
    CHECK(drift_integral(3.0, 10).norm == 0.0);

    const auto half = drift_integral(0.5, 3);
    CHECK(std::abs(half.components[0] - Complex(0.0, 1.0 / pi)) < 1e-16);
    CHECK(std::abs(half.components[1]) < 1e-16);
    CHECK(std::abs(half.components[0]) == doctest::Approx(1.0 / pi));
}

TEST_CASE("drift integral norm against the odd-harmonic partial sum") {
    // |c_n|^2 = 1/(pi n)^2 for odd n at t = 1/2, zero for even n.
    for (std::size_t N : {1ul, 10ul, 1001ul}) {
        double oracle = 0.0;
        for (std::size_t n = 1; n <= N; n += 2) oracle += 1.0 / (pi * pi * static_cast<double>(n * n));
        CHECK(drift_integral(0.5, N).norm_sq == doctest::Approx(oracle).epsilon(1e-13));
    }
    const double a = drift_integral(0.5, 10000).norm_sq;
    const double b = drift_integral(0.5, 20000).norm_sq;
    CHECK(b >= a);
    // Tail between 10^4 and 2 10^4 is about 1/(2 pi^2 10^4).
    CHECK(b - a == doctest::Approx(1.0 / (2.0 * pi * pi) * (1.0 / 10000 - 1.0 / 20000)).epsilon(1e-3));
}

TEST_CASE("norm is non-decreasing in N") {
    testing::Gen gen(51);
    for (int trial = 0; trial < 20; ++trial) {
        const double t = gen.uniform(0, 3);
        double prev = 0.0;
        for (std::size_t N = 1; N < 200; N += 7) {
            const double v = drift_integral(t, N).norm;
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("closed form against Simpson quadrature") {
    for (double t : {0.5, 0.37, 1.25}) {
        for (std::size_t n = 1; n <= 32; ++n) {
            const Complex closed = drift_integral(t, n).components[n - 1];
            CHECK(std::abs(closed - quadrature_component(n, t, 1e-4)) < 1e-8);
        }
    }
}

TEST_CASE("property: rotation group is unitary") {
    testing::Gen gen(52);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Complex> x(64);
        for (auto& c : x) c = Complex(gen.uniform(-1, 1), gen.uniform(-1, 1));
        const double h = gen.uniform(-3, 3);
        const double k = gen.uniform(-3, 3);
        double nx = 0, ny = 0;
        const auto y = rotate(x, h);
        for (std::size_t i = 0; i < x.size(); ++i) {
            nx += std::norm(x[i]);
            ny += std::norm(y[i]);
            CHECK(std::abs(std::abs(TruncatedSpectralModel::phase(i + 1, h)) - 1.0) < 1e-15);
        }
        CHECK(std::abs(std::sqrt(nx) - std::sqrt(ny)) < 1e-12);
        const auto hk = rotate(rotate(x, k), h);
        const auto direct = rotate(x, h + k);
        const auto back = rotate(rotate(x, h), -h);
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(hk[i] - direct[i]) < 1e-12);
            CHECK(std::abs(back[i] - x[i]) < 1e-12);
        }
    }
}

TEST_CASE("out of space report") {
    const auto r = out_of_space_report(0.5, {10, 20, 40, 80});
    CHECK(r.b_norm_sq == std::vector<double>{10, 20, 40, 80});
    CHECK(r.b_unbounded);
    for (std::size_t k = 1; k < r.integral_norm_sq.size(); ++k) {
        CHECK(r.integral_norm_sq[k] >= r.integral_norm_sq[k - 1]);
        if (k >= 2) {
            CHECK(r.integral_norm_sq[k] - r.integral_norm_sq[k - 1] <
                  r.integral_norm_sq[k - 1] - r.integral_norm_sq[k - 2]);
        }
    }
    CHECK(r.quadrature_pass);
    const auto integer_t = out_of_space_report(2.0, {5, 50});
    CHECK(integer_t.integral_norm_sq == std::vector<double>{0.0, 0.0});
    CHECK(integer_t.converged);
    CHECK_THROWS_AS(out_of_space_report(0.5, {100, 10}), DomainError);
}

TEST_CASE("spectral simulation moments") {
    const auto model = TruncatedSpectralModel::create(12, 0.5, 20);
    const auto ens = simulate_spectral_ou(model, 4000, 77);
    CHECK(ens.report.pass);
    CHECK(ens.report.checks.size() == 3 * 4 + 1);
    const auto again = simulate_spectral_ou(model, 4000, 77, 3);
    CHECK(again.terminal == ens.terminal);
    // Terminal values agree with the regenerated path.
    const auto path = spectral_path(model, 77, 123, 5);
    CHECK(path.back() == ens.at(123, 5));
    CHECK(path.front() == Complex(0.0));
}

TEST_CASE("one exact step has the stated covariance") {
    // Empirical covariance of a single step from zero against the closed-form integrals.
    const double dt = 0.13;
    const auto model = TruncatedSpectralModel::create(3, dt, 1);
    const std::size_t n_paths = 200000;
    const auto ens = simulate_spectral_ou(model, n_paths, 5);
    const std::size_t n = 3;
    const double w = 2 * pi * n;
    const double q = model.q_decay[n - 1];
    const Complex mean = drift_integral(dt, n).components[n - 1];
    double rr = 0, ii = 0, ri = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const Complex d = ens.at(i, n) - mean;
        rr += d.real() * d.real();
        ii += d.imag() * d.imag();
        ri += d.real() * d.imag();
    }
    const double N = static_cast<double>(n_paths);
    const double vrr = q * (dt / 2 + std::sin(2 * w * dt) / (4 * w));
    const double vii = q * (dt / 2 - std::sin(2 * w * dt) / (4 * w));
    const double vri = q * std::sin(w * dt) * std::sin(w * dt) / (2 * w);
    CHECK(rr / N == doctest::Approx(vrr).epsilon(0.02));
    CHECK(ii / N == doctest::Approx(vii).epsilon(0.02));
    CHECK(std::abs(ri / N - vri) < 4.0 * std::sqrt(vrr * vii / N + vri * vri / N));
}
