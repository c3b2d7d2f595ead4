#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyproc/generator.hpp"
#include "polyproc/graded_space.hpp"

namespace polyproc {

/// Structure constants of pointwise multiplication: entry (i, j) is the
/// product of basis entries i and j expanded in the basis. Stored
/// symmetrically; pairs whose product leaves the span are simply absent.
class ProductTable {
public:
    explicit ProductTable(BasisPtr basis, unsigned max_input_degree = 2);

    /// Products that follow from the evaluator types: the constant times
    /// anything, monomial times monomial, exponential times exponential,
    /// whenever the product is itself a basis entry.
    static ProductTable derive(BasisPtr basis, unsigned max_input_degree = 2);

    /// Throws InputError if the result exceeds degree(i) + degree(j).
    void set(std::size_t i, std::size_t j, PolyVec product);
    const PolyVec* find(std::size_t i, std::size_t j) const;

    const BasisPtr& basis() const { return basis_; }
    unsigned max_input_degree() const { return max_input_degree_; }
    std::size_t size() const { return table_.size(); }

    /// Every entry of degree >= 2 appears as a single-entry product of two
    /// lower-degree entries, i.e. the span is generated by its degree-1 part.
    /// False for bases with a non-product entry such as a tabulated u.
    bool generated_by_linear_entries() const;

private:
    static std::pair<std::size_t, std::size_t> key(std::size_t i, std::size_t j) {
        return i <= j ? std::pair{i, j} : std::pair{j, i};
    }

    BasisPtr basis_;
    unsigned max_input_degree_;
    std::map<std::pair<std::size_t, std::size_t>, PolyVec> table_;
};

struct TableValidation {
    double max_error = 0.0;
    std::size_t points = 0;
    bool pass = true;
    std::vector<std::string> failures;
};

/// Pointwise check of every table entry on a tensor grid of n_points per axis
/// over [lo, hi]^d (d <= 2; higher dimensions use the diagonal).
TableValidation validate_product_table(const ProductTable& table, double lo, double hi,
                                       std::size_t n_points = 33, double tol = 1e-10);

/// Bilinear extension of the table. Throws ProductGap naming the first pair
/// whose product is not available.
PolyVec multiply(const ProductTable& table, const PolyVec& p, const PolyVec& q);

/// Constant and linear drift parts of the process p(X) for p of degree 1:
/// G p = b[p] + sum_q A[p][q] q, so b is the constant row of G on the
/// degree-1 columns and A is the transpose of the degree-1 diagonal block.
struct AffineDriftData {
    std::vector<std::size_t> linear_entries;
    Eigen::VectorXd b;
    Eigen::MatrixXd A;
    /// max |b[p] + (A x~)(p) - (Gp)(x)| over the sample points.
    double reconstruction_residual = 0.0;
};

/// `sample` defaults to a small grid in [-1, 1]^d.
AffineDriftData drift_parts(const GeneratorMatrix& g, std::span<const StatePoint> sample = {});

/// a_{p,q} = G(pq) - p Gq - q Gp.
PolyVec covariance_poly(const GeneratorMatrix& g, const ProductTable& table, const PolyVec& p,
                        const PolyVec& q);

}  // namespace polyproc
