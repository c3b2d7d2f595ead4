#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyproc/error.hpp"
#include "polyproc/tabulated.hpp"

namespace polyproc {

using Complex = std::complex<double>;

enum class ScalarField { Real, Complex };

/// A point of the state space. Coordinates must be finite.
class StatePoint {
public:
    StatePoint() = default;
    explicit StatePoint(std::vector<double> coords);
    StatePoint(std::initializer_list<double> coords) : StatePoint(std::vector<double>(coords)) {}

    std::size_t dim() const { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_.at(i); }
    const std::vector<double>& coords() const { return coords_; }

private:
    std::vector<double> coords_;
};

/// Point evaluator of one basis function.
///
/// Monomial: prod_k x_k^{powers[k]} (empty powers is the constant one).
/// Tabulated: u(x_coordinate) read from a shared table.
/// ComplexExp: exp(i * frequency . x).
class Evaluator {
public:
    enum class Kind { Monomial, Tabulated, ComplexExp };

    static Evaluator constant_one() { return monomial({}); }
    static Evaluator monomial(std::vector<unsigned> powers);
    static Evaluator tabulated(std::shared_ptr<const TabulatedFunction> table,
                               std::size_t coordinate = 0);
    static Evaluator complex_exp(std::vector<double> frequency);

    Complex operator()(const StatePoint& x) const;
    /// Scalar-state shortcut, valid when the evaluator reads only coordinate 0.
    Complex at(double x) const;

    Kind kind() const { return kind_; }
    const std::vector<unsigned>& powers() const { return powers_; }
    const std::vector<double>& frequency() const { return frequency_; }
    const std::shared_ptr<const TabulatedFunction>& table() const { return table_; }
    std::size_t coordinate() const { return coordinate_; }

    bool is_constant_one() const;
    bool is_real_valued() const;
    /// Smallest state dimension the evaluator can be applied to.
    std::size_t min_state_dim() const;

private:
    Kind kind_ = Kind::Monomial;
    std::vector<unsigned> powers_;
    std::vector<double> frequency_;
    std::shared_ptr<const TabulatedFunction> table_;
    std::size_t coordinate_ = 0;
};

struct BasisEntry {
    std::string label;
    unsigned degree = 0;
    Evaluator eval;
};

/// Ordered list of basis functions with degrees. The span of the entries of
/// degree <= n is the space of polynomials of degree at most n, and the
/// entries of degree exactly n span its chosen complement.
class GradedBasis {
public:
    /// Validates: exactly one degree-0 entry which is the constant one,
    /// entries sorted by degree, unique labels, complex evaluators only on a
    /// complex field.
    static std::shared_ptr<const GradedBasis> create(std::vector<BasisEntry> entries,
                                                     ScalarField field = ScalarField::Real);

    std::size_t size() const { return entries_.size(); }
    const BasisEntry& entry(std::size_t i) const { return entries_.at(i); }
    const std::vector<BasisEntry>& entries() const { return entries_; }
    unsigned degree_of(std::size_t i) const { return entries_.at(i).degree; }
    unsigned max_degree() const { return max_degree_; }
    ScalarField field() const { return field_; }
    std::size_t state_dim() const { return state_dim_; }
    std::size_t constant_index() const { return constant_index_; }

    std::optional<std::size_t> index_of(const std::string& label) const;
    std::size_t require_index(const std::string& label) const;
    std::vector<std::size_t> indices_of_degree(unsigned n) const;
    /// dim of the span of entries with degree <= n.
    std::size_t dim_upto(unsigned n) const;

private:
    GradedBasis() = default;

    std::vector<BasisEntry> entries_;
    ScalarField field_ = ScalarField::Real;
    unsigned max_degree_ = 0;
    std::size_t state_dim_ = 1;
    std::size_t constant_index_ = 0;
};

using BasisPtr = std::shared_ptr<const GradedBasis>;

void require_same_basis(const BasisPtr& a, const BasisPtr& b, const char* what);

/// Polynomial as a dense coefficient vector over a graded basis.
template <class T>
class BasicPolyVec {
public:
    using Coeffs = Eigen::Matrix<T, Eigen::Dynamic, 1>;

    BasicPolyVec(BasisPtr basis, Coeffs coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
        if (!basis_) throw BasisMismatch("polynomial without a basis");
        if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
            throw BasisMismatch("coefficient vector of length " + std::to_string(coeffs_.size()) +
                                " on a basis with " + std::to_string(basis_->size()) + " entries");
        }
    }

    static BasicPolyVec zero(BasisPtr basis) {
        const auto n = static_cast<Eigen::Index>(basis->size());
        return BasicPolyVec(std::move(basis), Coeffs::Zero(n));
    }
    static BasicPolyVec unit(BasisPtr basis, std::size_t index, T value = T(1)) {
        auto p = zero(std::move(basis));
        p.coeffs_(static_cast<Eigen::Index>(index)) = value;
        return p;
    }
    static BasicPolyVec unit(const BasisPtr& basis, const std::string& label, T value = T(1)) {
        return unit(basis, basis->require_index(label), value);
    }
    static BasicPolyVec from(BasisPtr basis, const std::vector<T>& values) {
        Coeffs c(static_cast<Eigen::Index>(values.size()));
        for (std::size_t i = 0; i < values.size(); ++i) c(static_cast<Eigen::Index>(i)) = values[i];
        return BasicPolyVec(std::move(basis), std::move(c));
    }

    const BasisPtr& basis() const { return basis_; }
    const Coeffs& coeffs() const { return coeffs_; }
    std::size_t size() const { return static_cast<std::size_t>(coeffs_.size()); }
    T operator[](std::size_t i) const { return coeffs_(static_cast<Eigen::Index>(i)); }

    BasicPolyVec& operator+=(const BasicPolyVec& o) {
        require_same_basis(basis_, o.basis_, "addition");
        coeffs_ += o.coeffs_;
        return *this;
    }
    BasicPolyVec& operator-=(const BasicPolyVec& o) {
        require_same_basis(basis_, o.basis_, "subtraction");
        coeffs_ -= o.coeffs_;
        return *this;
    }
    BasicPolyVec& operator*=(T c) {
        coeffs_ *= c;
        return *this;
    }
    friend BasicPolyVec operator+(BasicPolyVec a, const BasicPolyVec& b) { return a += b; }
    friend BasicPolyVec operator-(BasicPolyVec a, const BasicPolyVec& b) { return a -= b; }
    friend BasicPolyVec operator*(T c, BasicPolyVec a) { return a *= c; }
    friend BasicPolyVec operator*(BasicPolyVec a, T c) { return a *= c; }

private:
    BasisPtr basis_;
    Coeffs coeffs_;
};

using PolyVec = BasicPolyVec<double>;
using ComplexPolyVec = BasicPolyVec<Complex>;

ComplexPolyVec to_complex(const PolyVec& p);

/// Keeps only the coefficients on entries of degree exactly n.
template <class T>
BasicPolyVec<T> project(const BasicPolyVec<T>& p, unsigned n) {
    const auto& basis = *p.basis();
    if (n > basis.max_degree()) {
        throw DomainError("projection onto degree " + std::to_string(n) + " above max degree " +
                          std::to_string(basis.max_degree()));
    }
    auto c = p.coeffs();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis.degree_of(i) != n) c(static_cast<Eigen::Index>(i)) = T(0);
    }
    return BasicPolyVec<T>(p.basis(), std::move(c));
}

/// Largest degree carrying a nonzero coefficient; 0 for the zero polynomial.
template <class T>
unsigned degree(const BasicPolyVec<T>& p) {
    unsigned d = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] != T(0) && p.basis()->degree_of(i) > d) d = p.basis()->degree_of(i);
    }
    return d;
}

double evaluate(const PolyVec& p, const StatePoint& x);
Complex evaluate(const ComplexPolyVec& p, const StatePoint& x);
/// Evaluates a real-coefficient polynomial over a possibly complex basis.
Complex evaluate_complex(const PolyVec& p, const StatePoint& x);

/// Allocation-free evaluator of a fixed polynomial on a scalar state, used in
/// the Monte-Carlo inner loops. Only nonzero terms are kept.
class ScalarPolynomial {
public:
    ScalarPolynomial() = default;
    explicit ScalarPolynomial(const PolyVec& p);

    double operator()(double x) const;
    Complex complex_at(double x) const;
    bool is_zero() const { return terms_.empty(); }
    bool is_real_valued() const { return real_valued_; }

private:
    struct Term {
        double coeff;
        const Evaluator* eval;
        unsigned power;  // monomial fast path
    };
    BasisPtr basis_;
    std::vector<Term> terms_;
    bool real_valued_ = true;
};

}  // namespace polyproc
