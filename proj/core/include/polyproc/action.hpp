#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "polyproc/generator.hpp"
#include "polyproc/graded_space.hpp"

namespace polyproc {

enum class ActionMethod { SeriesTruncated, ScalingSquaring, NilpotentExact, EigenDiagonal };

std::string_view to_string(ActionMethod method);

struct ActionResult {
    PolyVec result;
    ActionMethod method = ActionMethod::ScalingSquaring;
    std::size_t terms_used = 0;
    /// For `act`: relative sup-norm disagreement between the Krylov series and
    /// scaling-and-squaring, NaN when the series route is infeasible.
    /// For `act_series`: the a priori remainder bound.
    double error_estimate = 0.0;
    std::size_t squarings = 0;
};

/// Target for the a priori remainder bound of the truncated series.
inline constexpr double kSeriesRemainderTol = 1e-12;
/// Degree of the Taylor polynomial used after scaling (scaled 1-norm <= 1).
inline constexpr std::size_t kScaledTaylorDegree = 18;

/// exp(m) by scaling and squaring with s = ceil(log2(max(1, |m|_1))) and a
/// fixed-degree Taylor polynomial. Only products and sums are used, so exact
/// zero blocks of a block-triangular m stay exactly zero.
Eigen::MatrixXd expm_scaling_squaring(const Eigen::MatrixXd& m, std::size_t* squarings = nullptr);

/// T_h p = exp(hG) p via scaling and squaring, cross-checked against the
/// truncated series on the Krylov subspace of p.
ActionResult act(const GeneratorMatrix& g, const PolyVec& p, double h);

/// Power series sum_k h^k/k! G^k p evaluated on the Krylov subspace of p,
/// truncated once the remainder bound drops below kSeriesRemainderTol.
/// Throws DomainError when |hG|_1 is too large for the series to be usable.
ActionResult act_series(const GeneratorMatrix& g, const PolyVec& p, double h);

ActionResult act_scaling_squaring(const GeneratorMatrix& g, const PolyVec& p, double h);

/// Exact finite sum with degree(p) + 1 terms; requires a strongly reducing generator.
ActionResult act_nilpotent(const GeneratorMatrix& g, const PolyVec& p, double h,
                           double tol = kDefaultClassifyTol);

/// E[p(X_{t+h}) | X_t = x] = (T_h p)(x).
double conditional_moment(const GeneratorMatrix& g, const PolyVec& p, double h, const StatePoint& x);
Complex conditional_moment_complex(const GeneratorMatrix& g, const PolyVec& p, double h,
                                   const StatePoint& x);

/// Levy exponent psi with E exp(i u.L_t) = exp(t psi(u)), built from named parts.
class LevyExponent {
public:
    /// psi(u) = i drift.u - sigma^2 |u|^2 / 2
    static LevyExponent gaussian(std::vector<double> drift, double sigma);
    /// psi(u) = rate (exp(i u.jump) - 1)
    static LevyExponent poisson(double rate, std::vector<double> jump);
    /// Exact lookup of tabulated values; psi(0) = 0 is implied.
    static LevyExponent tabulated(std::vector<std::pair<std::vector<double>, Complex>> values);
    /// Sum of exponents (independent components).
    static LevyExponent compound(std::vector<LevyExponent> parts);

    Complex operator()(std::span<const double> u) const;

private:
    enum class Kind { Gaussian, Poisson, Tabulated, Compound };
    Kind kind_ = Kind::Gaussian;
    std::vector<double> vec_;
    double scalar_ = 0.0;
    std::vector<std::pair<std::vector<double>, Complex>> table_;
    std::vector<LevyExponent> parts_;
};

/// Diagonal action on exponentials: c_n e^{i u_n .} -> c_n exp(h psi(u_n)) e^{i u_n .}.
/// The basis must consist of the constant plus complex exponentials; h >= 0.
ComplexPolyVec eigen_act(const LevyExponent& psi, const ComplexPolyVec& p, double h);

}  // namespace polyproc
