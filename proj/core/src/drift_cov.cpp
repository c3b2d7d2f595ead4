#include "polyproc/drift_cov.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace polyproc {

namespace {

std::optional<std::size_t> find_monomial(const GradedBasis& basis, const std::vector<unsigned>& powers) {
    const Evaluator probe = Evaluator::monomial(powers);
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto& e = basis.entry(k).eval;
        if (e.kind() == Evaluator::Kind::Monomial && e.powers() == probe.powers()) return k;
    }
    return std::nullopt;
}

std::optional<std::size_t> find_exponential(const GradedBasis& basis, std::vector<double> freq) {
    while (!freq.empty() && freq.back() == 0.0) freq.pop_back();
    if (freq.empty()) return basis.constant_index();
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto& e = basis.entry(k).eval;
        if (e.kind() != Evaluator::Kind::ComplexExp) continue;
        auto f = e.frequency();
        while (!f.empty() && f.back() == 0.0) f.pop_back();
        if (f == freq) return k;
    }
    return std::nullopt;
}

std::optional<std::size_t> derived_product(const GradedBasis& basis, std::size_t i, std::size_t j) {
    if (i == basis.constant_index()) return j;
    if (j == basis.constant_index()) return i;
    const auto& a = basis.entry(i).eval;
    const auto& b = basis.entry(j).eval;
    if (a.kind() == Evaluator::Kind::Monomial && b.kind() == Evaluator::Kind::Monomial) {
        std::vector<unsigned> powers(std::max(a.powers().size(), b.powers().size()), 0u);
        for (std::size_t k = 0; k < a.powers().size(); ++k) powers[k] += a.powers()[k];
        for (std::size_t k = 0; k < b.powers().size(); ++k) powers[k] += b.powers()[k];
        return find_monomial(basis, powers);
    }
    if (a.kind() == Evaluator::Kind::ComplexExp && b.kind() == Evaluator::Kind::ComplexExp) {
        std::vector<double> freq(std::max(a.frequency().size(), b.frequency().size()), 0.0);
        for (std::size_t k = 0; k < a.frequency().size(); ++k) freq[k] += a.frequency()[k];
        for (std::size_t k = 0; k < b.frequency().size(); ++k) freq[k] += b.frequency()[k];
        return find_exponential(basis, std::move(freq));
    }
    return std::nullopt;
}

std::vector<StatePoint> grid_points(std::size_t dim, double lo, double hi, std::size_t n) {
    std::vector<double> axis(n);
    for (std::size_t k = 0; k < n; ++k) {
        axis[k] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    }
    std::vector<StatePoint> out;
    if (dim == 1) {
        for (double x : axis) out.push_back(StatePoint{x});
    } else if (dim == 2) {
        for (double x : axis) {
            for (double y : axis) out.push_back(StatePoint{x, y});
        }
    } else {
        for (double x : axis) out.emplace_back(std::vector<double>(dim, x));
    }
    return out;
}

}  // namespace

ProductTable::ProductTable(BasisPtr basis, unsigned max_input_degree)
    : basis_(std::move(basis)), max_input_degree_(max_input_degree) {
    if (!basis_) throw BasisMismatch("product table without a basis");
}

ProductTable ProductTable::derive(BasisPtr basis, unsigned max_input_degree) {
    ProductTable table(basis, max_input_degree);
    for (std::size_t i = 0; i < basis->size(); ++i) {
        if (basis->degree_of(i) > max_input_degree) continue;
        for (std::size_t j = i; j < basis->size(); ++j) {
            if (basis->degree_of(j) > max_input_degree) continue;
            if (auto k = derived_product(*basis, i, j)) table.set(i, j, PolyVec::unit(basis, *k));
        }
    }
    return table;
}

void ProductTable::set(std::size_t i, std::size_t j, PolyVec product) {
    require_same_basis(basis_, product.basis(), "product table");
    if (i >= basis_->size() || j >= basis_->size()) throw InputError("product table index out of range");
    const unsigned bound = basis_->degree_of(i) + basis_->degree_of(j);
    if (degree(product) > bound) {
        throw InputError("product of '" + basis_->entry(i).label + "' and '" + basis_->entry(j).label +
                         "' has degree " + std::to_string(degree(product)) + " > " + std::to_string(bound));
    }
    table_.insert_or_assign(key(i, j), std::move(product));
}

const PolyVec* ProductTable::find(std::size_t i, std::size_t j) const {
    const auto it = table_.find(key(i, j));
    return it == table_.end() ? nullptr : &it->second;
}

bool ProductTable::generated_by_linear_entries() const {
    const auto& basis = *basis_;
    for (std::size_t k = 0; k < basis.size(); ++k) {
        if (basis.degree_of(k) < 2) continue;
        const PolyVec target = PolyVec::unit(basis_, k);
        bool found = false;
        for (const auto& [ij, product] : table_) {
            const auto [i, j] = ij;
            if (basis.degree_of(i) == 0 || basis.degree_of(j) == 0) continue;
            if (product.coeffs() == target.coeffs()) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

TableValidation validate_product_table(const ProductTable& table, double lo, double hi,
                                       std::size_t n_points, double tol) {
    const auto& basis = *table.basis();
    TableValidation out;
    const auto points = grid_points(basis.state_dim(), lo, hi, n_points);
    out.points = points.size();
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i; j < basis.size(); ++j) {
            const PolyVec* product = table.find(i, j);
            if (!product) continue;
            double worst = 0.0;
            for (const auto& x : points) {
                const Complex expected = basis.entry(i).eval(x) * basis.entry(j).eval(x);
                const Complex got = evaluate_complex(*product, x);
                const double err = std::abs(got - expected) / std::max(1.0, std::abs(expected));
                worst = std::max(worst, err);
            }
            out.max_error = std::max(out.max_error, worst);
            if (worst > tol) {
                out.pass = false;
                out.failures.push_back(basis.entry(i).label + "*" + basis.entry(j).label);
            }
        }
    }
    return out;
}

PolyVec multiply(const ProductTable& table, const PolyVec& p, const PolyVec& q) {
    require_same_basis(table.basis(), p.basis(), "multiplication");
    require_same_basis(table.basis(), q.basis(), "multiplication");
    const auto& basis = *table.basis();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (q[j] == 0.0) continue;
            const PolyVec* product = table.find(i, j);
            if (!product) {
                throw ProductGap("product of '" + basis.entry(i).label + "' and '" + basis.entry(j).label +
                                 "' leaves the modeled space");
            }
            out += (p[i] * q[j]) * product->coeffs();
        }
    }
    return PolyVec(table.basis(), std::move(out));
}

AffineDriftData drift_parts(const GeneratorMatrix& g, std::span<const StatePoint> sample) {
    require_grading(g);
    const auto& basis = *g.basis();
    const auto& m = g.matrix();

    AffineDriftData out;
    out.linear_entries = basis.indices_of_degree(1);
    const auto n = static_cast<Eigen::Index>(out.linear_entries.size());
    const auto c = static_cast<Eigen::Index>(basis.constant_index());
    out.b = Eigen::VectorXd(n);
    out.A = Eigen::MatrixXd(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto col = static_cast<Eigen::Index>(out.linear_entries[static_cast<std::size_t>(k)]);
        out.b(k) = m(c, col);
        for (Eigen::Index l = 0; l < n; ++l) {
            out.A(k, l) = m(static_cast<Eigen::Index>(out.linear_entries[static_cast<std::size_t>(l)]), col);
        }
    }

    std::vector<StatePoint> defaults;
    if (sample.empty()) {
        defaults = grid_points(basis.state_dim(), -1.0, 1.0, 5);
        sample = defaults;
    }
    for (const auto& x : sample) {
        std::vector<Complex> lin(static_cast<std::size_t>(n));
        for (Eigen::Index l = 0; l < n; ++l) {
            lin[static_cast<std::size_t>(l)] = basis.entry(out.linear_entries[static_cast<std::size_t>(l)]).eval(x);
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            Complex lhs = out.b(k);
            for (Eigen::Index l = 0; l < n; ++l) lhs += out.A(k, l) * lin[static_cast<std::size_t>(l)];
            const PolyVec gp = g.apply(PolyVec::unit(g.basis(), out.linear_entries[static_cast<std::size_t>(k)]));
            const Complex rhs = evaluate_complex(gp, x);
            out.reconstruction_residual = std::max(out.reconstruction_residual, std::abs(lhs - rhs));
        }
    }
    return out;
}

PolyVec covariance_poly(const GeneratorMatrix& g, const ProductTable& table, const PolyVec& p,
                        const PolyVec& q) {
    require_same_basis(g.basis(), table.basis(), "covariance polynomial");
    const PolyVec pq = multiply(table, p, q);
    return g.apply(pq) - multiply(table, p, g.apply(q)) - multiply(table, q, g.apply(p));
}

}  // namespace polyproc
