#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyproc/graded_space.hpp"

namespace polyproc {

inline constexpr double kDefaultClassifyTol = 1e-10;
inline constexpr double kDefaultRankTol = 1e-10;

/// Generator as a matrix over a graded basis: entry (i, j) is the
/// coefficient of basis entry i in G(entry j), so column j is G(entry j).
class GeneratorMatrix {
public:
    GeneratorMatrix(BasisPtr basis, Eigen::MatrixXd matrix);

    const BasisPtr& basis() const { return basis_; }
    const Eigen::MatrixXd& matrix() const { return matrix_; }
    std::size_t size() const { return basis_->size(); }

    PolyVec apply(const PolyVec& p) const;
    GeneratorMatrix scaled(double c) const { return {basis_, c * matrix_}; }

private:
    BasisPtr basis_;
    Eigen::MatrixXd matrix_;
};

struct GradingReport {
    /// Frobenius norm of the block Pi_l G Pi_n at (l, n).
    Eigen::MatrixXd block_norms;
    bool constant_column_zero = true;
    /// Blocks (l, n) with l > n that are not exactly zero.
    std::vector<std::pair<unsigned, unsigned>> violations;
    bool pass = true;
};

GradingReport check_grading(const GeneratorMatrix& g);
/// Throws GradingError describing the first violation.
void require_grading(const GeneratorMatrix& g);

/// Rows and columns of degree exactly n.
Eigen::MatrixXd diagonal_block(const GeneratorMatrix& g, unsigned n);

enum class GeneratorKind { LocallyFinite, Reducing, StronglyReducing };

std::string_view to_string(GeneratorKind kind);

struct GradeWitness {
    unsigned degree = 0;
    std::size_t dim = 0;
    double lambda = 0.0;     // trace / dim
    double residual = 0.0;   // ||B - lambda I||_F
    double threshold = 0.0;  // tol * max(1, ||B||_F)
    bool scalar = true;
};

struct Classification {
    GeneratorKind kind = GeneratorKind::LocallyFinite;
    /// lambda_1 .. lambda_max_degree, present for reducing generators.
    std::optional<std::vector<double>> lambda_ladder;
    std::vector<GradeWitness> witness;
};

Classification classify(const GeneratorMatrix& g, double tol = kDefaultClassifyTol);

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovSubspace {
    /// Orthonormal columns spanning {p, Gp, G^2 p, ...}; column 0 is p / |p|.
    Eigen::MatrixXd basis;
    /// basis^T G basis.
    Eigen::MatrixXd projected;
    /// max over columns v of |Gv - proj(Gv)| / max(1, |Gv|).
    double max_residual = 0.0;
};

/// Arnoldi closure of p under a black-box linear map (modified Gram-Schmidt
/// with one reorthogonalization pass). Throws NotLocallyFinite if the span
/// does not close within max_dim vectors.
KrylovSubspace krylov_invariant_subspace(const LinearMap& apply, const Eigen::VectorXd& p,
                                         double rank_tol = kDefaultRankTol, std::size_t max_dim = 64);

KrylovSubspace krylov_invariant_subspace(const GeneratorMatrix& g, const PolyVec& p,
                                         double rank_tol = kDefaultRankTol, std::size_t max_dim = 64);

}  // namespace polyproc
