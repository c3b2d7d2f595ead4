#pragma once

#include <cstdint>
#include <vector>

#include "polyproc/graded_space.hpp"
#include "polyproc/sim_harness.hpp"

namespace polyproc {

/// Rotation group on the first N coordinates of l2 (index n = 1..N):
/// (U_h x)_n = exp(2 pi i n h) x_n, covariance (Q x)_n = x_n / (1 + n)^2.
struct TruncatedSpectralModel {
    std::size_t N = 0;
    std::vector<double> rotation_rates;  // 2 pi n
    std::vector<double> q_decay;         // 1 / (1 + n)^2
    TimeGrid t_grid;

    static TruncatedSpectralModel create(std::size_t N, double horizon, std::size_t steps);

    /// exp(2 pi i n h) with the phase reduced modulo one first, so integer
    /// multiples of a period give exactly one.
    static Complex phase(std::size_t n, double h);
};

std::vector<Complex> rotate(const std::vector<Complex>& x, double h);

struct DriftIntegral {
    std::vector<Complex> components;  // components[n - 1]
    double norm_sq = 0.0;
    double norm = 0.0;
};

/// int_0^t U_s b ds for b = (1, 1, ...): component n = (e^{2 pi i n t} - 1) / (2 pi i n).
DriftIntegral drift_integral(double t, std::size_t N);

/// Composite Simpson rule for int_0^t e^{2 pi i n s} ds with the given step
/// (rounded so that the interval count is even).
Complex quadrature_component(std::size_t n, double t, double step);

inline constexpr double kSpectralConvergenceTol = 1e-6;
inline constexpr double kQuadratureTol = 1e-8;
inline constexpr double kQuadratureStep = 1e-4;
inline constexpr std::size_t kQuadratureModes = 32;

struct OutOfSpaceReport {
    double t = 0.0;
    std::vector<std::size_t> N_list;
    std::vector<double> b_norm_sq;
    std::vector<double> integral_norm_sq;
    /// b_norm_sq[k] == N_list[k] for every k.
    bool b_unbounded = true;
    /// |integral_norm_sq| change between the last two truncations.
    double last_change = 0.0;
    bool converged = true;
    /// max over n = 1..kQuadratureModes of |closed form - Simpson|.
    double quadrature_max_error = 0.0;
    bool quadrature_pass = true;
    bool pass = true;
};

OutOfSpaceReport out_of_space_report(double t, const std::vector<std::size_t>& N_list);

struct SpectralEnsemble {
    TruncatedSpectralModel model;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    /// X(t) at the horizon, terminal[path * N + (n - 1)].
    std::vector<Complex> terminal;
    ValidationReport report;

    Complex at(std::size_t path, std::size_t n) const { return terminal[path * model.N + (n - 1)]; }
};

/// Coordinates that get mean and variance checks (those not above N).
inline const std::vector<std::size_t> kSpectralCheckedModes{1, 2, 5, 10};

/// Exact Gaussian stepping of X_n on the model grid from X_n(0) = 0:
/// X_n(t + dt) = e^{i w dt} X_n(t) + (e^{i w dt} - 1)/(i w) + xi, with xi the
/// stochastic convolution of a real Wiener coordinate of variance rate q_n.
SpectralEnsemble simulate_spectral_ou(const TruncatedSpectralModel& model, std::size_t n_paths,
                                      std::uint64_t seed, std::size_t threads = 1,
                                      double tolerance_multiple = 3.0);

/// Regenerates the path of coordinate n for one ensemble member.
std::vector<Complex> spectral_path(const TruncatedSpectralModel& model, std::uint64_t seed, std::size_t path,
                                   std::size_t n);

}  // namespace polyproc
