#include "polyproc/generator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polyproc {

GeneratorMatrix::GeneratorMatrix(BasisPtr basis, Eigen::MatrixXd matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
    if (!basis_) throw BasisMismatch("generator without a basis");
    const auto n = static_cast<Eigen::Index>(basis_->size());
    if (matrix_.rows() != n || matrix_.cols() != n) {
        throw BasisMismatch("generator matrix is " + std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) + " on a basis with " +
                            std::to_string(n) + " entries");
    }
    if (!matrix_.allFinite()) throw InputError("generator matrix has non-finite entries");
}

PolyVec GeneratorMatrix::apply(const PolyVec& p) const {
    require_same_basis(basis_, p.basis(), "generator application");
    return PolyVec(basis_, matrix_ * p.coeffs());
}

GradingReport check_grading(const GeneratorMatrix& g) {
    const auto& basis = *g.basis();
    const unsigned top = basis.max_degree();
    GradingReport report;
    report.block_norms = Eigen::MatrixXd::Zero(top + 1, top + 1);

    const auto& m = g.matrix();
    for (std::size_t j = 0; j < basis.size(); ++j) {
        for (std::size_t i = 0; i < basis.size(); ++i) {
            const double v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            report.block_norms(basis.degree_of(i), basis.degree_of(j)) += v * v;
        }
    }
    report.block_norms = report.block_norms.cwiseSqrt();

    const auto c = static_cast<Eigen::Index>(basis.constant_index());
    report.constant_column_zero = m.col(c).isZero(0.0);

    for (unsigned l = 0; l <= top; ++l) {
        for (unsigned n = 0; n < l; ++n) {
            if (report.block_norms(l, n) != 0.0) report.violations.emplace_back(l, n);
        }
    }
    report.pass = report.constant_column_zero && report.violations.empty();
    return report;
}

void require_grading(const GeneratorMatrix& g) {
    const auto report = check_grading(g);
    if (report.pass) return;
    if (!report.constant_column_zero) {
        throw GradingError("generator does not map constants to zero");
    }
    const auto [l, n] = report.violations.front();
    throw GradingError("generator raises degree: block (" + std::to_string(l) + "," +
                       std::to_string(n) + ") is nonzero");
}

Eigen::MatrixXd diagonal_block(const GeneratorMatrix& g, unsigned n) {
    const auto& basis = *g.basis();
    if (n > basis.max_degree()) {
        throw DomainError("diagonal block of degree " + std::to_string(n) + " above max degree " +
                          std::to_string(basis.max_degree()));
    }
    const auto idx = basis.indices_of_degree(n);
    const auto k = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd block(k, k);
    for (Eigen::Index r = 0; r < k; ++r) {
        for (Eigen::Index c = 0; c < k; ++c) {
            block(r, c) = g.matrix()(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(r)]),
                                     static_cast<Eigen::Index>(idx[static_cast<std::size_t>(c)]));
        }
    }
    return block;
}

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::LocallyFinite: return "LocallyFinite";
        case GeneratorKind::Reducing: return "Reducing";
        case GeneratorKind::StronglyReducing: return "StronglyReducing";
    }
    return "?";
}

Classification classify(const GeneratorMatrix& g, double tol) {
    require_grading(g);
    const unsigned top = g.basis()->max_degree();

    Classification out;
    bool all_scalar = true;
    bool all_zero = true;
    for (unsigned n = 0; n <= top; ++n) {
        const Eigen::MatrixXd block = diagonal_block(g, n);
        GradeWitness w;
        w.degree = n;
        w.dim = static_cast<std::size_t>(block.rows());
        if (w.dim > 0) {
            w.lambda = block.trace() / static_cast<double>(w.dim);
            const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(block.rows(), block.cols());
            w.residual = (block - w.lambda * identity).norm();
            w.threshold = tol * std::max(1.0, block.norm());
            w.scalar = w.residual <= w.threshold;
        }
        all_scalar = all_scalar && w.scalar;
        all_zero = all_zero && std::abs(w.lambda) <= w.threshold;
        out.witness.push_back(w);
    }

    if (!all_scalar) {
        out.kind = GeneratorKind::LocallyFinite;
        return out;
    }
    std::vector<double> ladder;
    for (unsigned n = 1; n <= top; ++n) ladder.push_back(all_zero ? 0.0 : out.witness[n].lambda);
    out.kind = all_zero ? GeneratorKind::StronglyReducing : GeneratorKind::Reducing;
    out.lambda_ladder = std::move(ladder);
    return out;
}

namespace {

// Orthogonalizes w against the first k columns of v (MGS, then one more pass).
void orthogonalize(const Eigen::MatrixXd& v, Eigen::Index k, Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index j = 0; j < k; ++j) w -= v.col(j).dot(w) * v.col(j);
    }
}

}  // namespace

KrylovSubspace krylov_invariant_subspace(const LinearMap& apply, const Eigen::VectorXd& p,
                                         double rank_tol, std::size_t max_dim) {
    const double p_norm = p.norm();
    if (!(p_norm > 0.0)) throw DomainError("Krylov closure of the zero vector");
    if (max_dim == 0) throw DomainError("Krylov dimension budget must be positive");

    const Eigen::Index n = p.size();
    const auto cap = static_cast<Eigen::Index>(std::min<std::size_t>(max_dim, static_cast<std::size_t>(n) + 1));
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, cap);
    v.col(0) = p / p_norm;

    Eigen::Index k = 1;
    double max_residual = 0.0;
    while (true) {
        Eigen::VectorXd w = apply(v.col(k - 1));
        if (w.size() != n) throw BasisMismatch("Krylov callback changed the vector length");
        const double w_norm = w.norm();
        orthogonalize(v, k, w);
        const double residual = w.norm() / std::max(1.0, w_norm);
        if (residual < rank_tol) {
            max_residual = std::max(max_residual, residual);
            break;
        }
        if (k == cap || static_cast<std::size_t>(k) >= max_dim) {
            throw NotLocallyFinite("not locally finite at this p within budget: Krylov span exceeds " +
                                   std::to_string(max_dim) + " dimensions");
        }
        v.col(k) = w / w.norm();
        ++k;
    }

    KrylovSubspace out;
    out.basis = v.leftCols(k);
    // Recompute the projection and residuals from scratch on the final span.
    out.projected = Eigen::MatrixXd(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd gv = apply(out.basis.col(j));
        const Eigen::VectorXd coords = out.basis.transpose() * gv;
        out.projected.col(j) = coords;
        const double r = (gv - out.basis * coords).norm() / std::max(1.0, gv.norm());
        max_residual = std::max(max_residual, r);
    }
    out.max_residual = max_residual;
    return out;
}

KrylovSubspace krylov_invariant_subspace(const GeneratorMatrix& g, const PolyVec& p, double rank_tol,
                                         std::size_t max_dim) {
    require_same_basis(g.basis(), p.basis(), "Krylov closure");
    const Eigen::MatrixXd& m = g.matrix();
    return krylov_invariant_subspace([&m](const Eigen::VectorXd& v) -> Eigen::VectorXd { return m * v; },
                                     p.coeffs(), rank_tol, max_dim);
}

}  // namespace polyproc
