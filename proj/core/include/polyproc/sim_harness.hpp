#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "polyproc/action.hpp"
#include "polyproc/drift_cov.hpp"
#include "polyproc/generator.hpp"
#include "polyproc/graded_space.hpp"
#include "polyproc/tabulated.hpp"

namespace polyproc {

using ScalarFunction = std::function<double(double)>;

/// Splits [0, n) into contiguous chunks run on up to `threads` workers and
/// rethrows the first exception. Callers write results by index so the outcome
/// does not depend on the worker count.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& body);

struct SampleMoments {
    double mean = 0.0;
    double sd = 0.0;  // n - 1 denominator
    double se = 0.0;  // sd / sqrt(n)
};

/// Computed around the first sample, so identical samples give their value
/// back exactly.
SampleMoments sample_moments(std::span<const double> v);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

/// Scalar diffusion dX = drift(X) dt + sigma(X) dW together with the
/// generator matrix that is supposed to describe it on a graded basis.
struct ProcessModel {
    std::string name;
    ScalarFunction drift;
    ScalarFunction sigma;
    Interval state_range;
    double x0 = 0.0;
    std::shared_ptr<const GeneratorMatrix> generator;

    const BasisPtr& basis() const { return generator->basis(); }
};

/// drift(x) + sigma^2(x) polynomial coefficients: drift = mu + gamma x,
/// sigma^2 = s0 + s1 x + s2 x^2.
struct PolynomialDiffusion {
    double mu = 0.0;
    double gamma = 0.0;
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
};

/// {1, x, x2, ..., x<degree>} with labels "1", "x", "x2", ...
BasisPtr monomial_basis(unsigned degree);
GeneratorMatrix polynomial_diffusion_generator(const BasisPtr& monomials, const PolynomialDiffusion& d);
ProcessModel make_polynomial_diffusion(std::string name, const PolynomialDiffusion& d, double x0,
                                       Interval range, unsigned degree = 2);

struct ConsistencyReport {
    double max_deviation = 0.0;
    double worst_x = 0.0;
    std::string worst_entry;
    bool pass = true;
};

/// Compares (G f)(x) with drift f' + sigma^2/2 f'' (central differences)
/// for every basis entry on an n_grid-point grid over the state range
/// intersected with [-kConsistencyWindow, kConsistencyWindow] (x0 +- the
/// window when that is empty). The tolerance is tol plus the rounding floor
/// of the difference quotients.
inline constexpr double kConsistencyWindow = 5.0;
ConsistencyReport check_generator_consistency(const ProcessModel& model, std::size_t n_grid = 33,
                                              double fd_step = 1e-4, double tol = 1e-8);

struct TimeGrid {
    double dt = 0.0;
    std::size_t steps = 0;

    double time(std::size_t k) const { return dt * static_cast<double>(k); }
    double horizon() const { return time(steps); }
    /// Grid index of t; throws DomainError if t is not a grid point.
    std::size_t index_of(double t) const;
};

struct SimulationOptions {
    std::size_t threads = 1;
    /// Each step uses the sum of `refinement` consecutive normals scaled by
    /// 1/sqrt(refinement), so an ensemble at dt shares its Brownian path with
    /// the ensemble at dt / refinement and the same seed.
    std::size_t refinement = 1;
    bool store_paths = false;
};

/// Seeded Euler-Maruyama ensemble. Paths are a pure function of
/// (model, grid, seed, refinement, path index) and are regenerated on demand
/// unless stored.
class PathEnsemble {
public:
    const ProcessModel& model() const { return *model_; }
    const std::shared_ptr<const ProcessModel>& model_ptr() const { return model_; }
    const TimeGrid& grid() const { return grid_; }
    std::size_t n_paths() const { return n_paths_; }
    std::size_t n_times() const { return grid_.steps + 1; }
    std::uint64_t seed() const { return seed_; }
    const SimulationOptions& options() const { return options_; }

    std::size_t clipped_steps() const { return clipped_steps_; }
    double clipped_fraction() const;
    bool stored() const { return !storage_.empty(); }

    /// Writes path i (n_times values) into out.
    void path(std::size_t i, std::span<double> out) const;

    /// fn(path_index, states) for every path, results kept in path order.
    template <class T, class F>
    std::vector<T> map_paths(F&& fn) const;

private:
    friend PathEnsemble simulate(std::shared_ptr<const ProcessModel>, double, double, std::size_t,
                                 std::uint64_t, SimulationOptions);
    PathEnsemble() = default;

    std::shared_ptr<const ProcessModel> model_;
    TimeGrid grid_;
    std::size_t n_paths_ = 0;
    std::uint64_t seed_ = 0;
    SimulationOptions options_;
    std::size_t clipped_steps_ = 0;
    std::vector<double> storage_;
};

/// X_{k+1} = X_k + drift(X_k) dt + sigma(X_k) sqrt(dt) Z_k, with Z_k from the
/// counter-based stream keyed by (seed, path, step). Exits from the state
/// range are clipped and counted; a non-finite state throws SimulationError.
PathEnsemble simulate(std::shared_ptr<const ProcessModel> model, double horizon, double dt,
                      std::size_t n_paths, std::uint64_t seed, SimulationOptions options = {});

/// Regenerates one path; returns the number of clipped steps.
std::size_t generate_path(const ProcessModel& model, const TimeGrid& grid, std::uint64_t seed,
                          std::size_t refinement, std::size_t path_index, std::span<double> out);

struct ValidationCheck {
    std::string name;
    double statistic = 0.0;
    double standard_error = 0.0;
    double allowance = 0.0;
    /// pass iff |statistic| <= threshold.
    double threshold = 0.0;
    bool pass = true;
};

struct DetailRow {
    double time = 0.0;
    std::string quantity;
    double sample = 0.0;
    double reference = 0.0;
    double standard_error = 0.0;
};

struct ValidationReport {
    std::string test;
    double statistic = 0.0;
    double standard_error = 0.0;
    double tolerance_multiple = 3.0;
    bool pass = true;
    double clipped_fraction = 0.0;
    std::vector<ValidationCheck> checks;
    std::vector<DetailRow> details;
    std::vector<std::string> flags;
};

/// Euler weak-error budget: allowance = kEulerBiasConstant * dt * h * scale.
/// On the OU model the mean bias is |x0| e^{-kh} k^2 h dt / 2, i.e. a
/// constant of 1/2 at k = 1; the default keeps a factor two of headroom.
inline constexpr double kEulerBiasConstant = 1.0;
/// A report fails outright above this fraction of clipped path-steps.
inline constexpr double kMaxClippedFraction = 1e-3;
inline constexpr double kCovariationThreshold = 0.05;

/// Sample mean of p(X_h) minus (T_h p)(x0).
ValidationReport moment_mc_test(const PathEnsemble& ens, const GeneratorMatrix& g, const PolyVec& p,
                                double h, double tolerance_multiple = 3.0);

/// moment_mc_test for several polynomials from a single pass over the paths.
std::vector<ValidationReport> moment_mc_tests(const PathEnsemble& ens, const GeneratorMatrix& g,
                                              const std::vector<PolyVec>& ps, double h,
                                              double tolerance_multiple = 3.0);

/// Mean of M_t - M_s with M_t = p(X_t) - int_0^t (Gp)(X_r) dr (trapezoidal),
/// and its sample covariance with p(X_s).
ValidationReport martingale_residual_test(const PathEnsemble& ens, const GeneratorMatrix& g,
                                          const PolyVec& p, double s, double t,
                                          double tolerance_multiple = 3.0);

/// Sample covariance of M over [t0, t1] and [t1, t2].
ValidationReport martingale_increment_test(const PathEnsemble& ens, const GeneratorMatrix& g,
                                           const PolyVec& p, double t0, double t1, double t2,
                                           double tolerance_multiple = 3.0);

/// Per path, realized covariation sum dp(X) dq(X) over the whole grid against
/// the trapezoidal integral of a_{p,q}(X); statistic = mean relative error.
ValidationReport covariation_test(const PathEnsemble& ens, const GeneratorMatrix& g,
                                  const ProductTable& table, const PolyVec& p, const PolyVec& q,
                                  double threshold = kCovariationThreshold);

/// Sample mean of p(X_h) against eigen_act(psi, p, h) at x0, real and
/// imaginary parts checked separately.
ValidationReport eigen_mc_test(const PathEnsemble& ens, const LevyExponent& psi, const ComplexPolyVec& p,
                               double h, double tolerance_multiple = 3.0);

struct IntegrabilityReport {
    double time_average = 0.0;  // mean over paths and grid times of p(X)^2
    bool finite = true;
};

IntegrabilityReport moment_integrability_check(const PathEnsemble& ens, const PolyVec& p);

/// RK4 solution of u'' = x^2 / u, u(0) = 1, u'(0) = 0, integrated from 0 in
/// both directions over [-x_max, x_max]. Throws DomainError if u is not
/// positive and InputError if the step is too coarse for the tabulated u' to
/// agree with central differences of u within 1e-6.
TabulatedFunction solve_sigma_ode(double x_max, double step);

/// dX = sqrt(u(X)) dW on basis {1, x, x2, u} with G x2 = u, G u = x^2 / 2.
ProcessModel make_sigma_ode_model(std::shared_ptr<const TabulatedFunction> u, double x0 = 0.0);

template <class T, class F>
std::vector<T> PathEnsemble::map_paths(F&& fn) const {
    std::vector<T> results(n_paths_);
    parallel_chunks(n_paths_, options_.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> buffer(n_times());
        for (std::size_t i = begin; i < end; ++i) {
            path(i, buffer);
            results[i] = fn(i, std::span<const double>(buffer));
        }
    });
    return results;
}

}  // namespace polyproc
