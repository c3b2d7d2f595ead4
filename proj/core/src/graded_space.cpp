#include "polyproc/graded_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace polyproc {

StatePoint::StatePoint(std::vector<double> coords) : coords_(std::move(coords)) {
    for (double c : coords_) {
        if (!std::isfinite(c)) throw DomainError("state point with a non-finite coordinate");
    }
}

Evaluator Evaluator::monomial(std::vector<unsigned> powers) {
    // Trailing zero powers do not change the function.
    while (!powers.empty() && powers.back() == 0) powers.pop_back();
    Evaluator e;
    e.kind_ = Kind::Monomial;
    e.powers_ = std::move(powers);
    return e;
}

Evaluator Evaluator::tabulated(std::shared_ptr<const TabulatedFunction> table, std::size_t coordinate) {
    if (!table) throw InputError("tabulated evaluator without a table");
    Evaluator e;
    e.kind_ = Kind::Tabulated;
    e.table_ = std::move(table);
    e.coordinate_ = coordinate;
    return e;
}

Evaluator Evaluator::complex_exp(std::vector<double> frequency) {
    for (double f : frequency) {
        if (!std::isfinite(f)) throw InputError("complex exponential with a non-finite frequency");
    }
    Evaluator e;
    e.kind_ = Kind::ComplexExp;
    e.frequency_ = std::move(frequency);
    return e;
}

Complex Evaluator::operator()(const StatePoint& x) const {
    if (x.dim() < min_state_dim()) {
        throw DomainError("state point of dimension " + std::to_string(x.dim()) +
                          " for an evaluator needing " + std::to_string(min_state_dim()));
    }
    switch (kind_) {
        case Kind::Monomial: {
            double v = 1.0;
            for (std::size_t k = 0; k < powers_.size(); ++k) {
                for (unsigned j = 0; j < powers_[k]; ++j) v *= x[k];
            }
            return {v, 0.0};
        }
        case Kind::Tabulated:
            return {(*table_)(x[coordinate_]), 0.0};
        case Kind::ComplexExp: {
            double phase = 0.0;
            for (std::size_t k = 0; k < frequency_.size(); ++k) phase += frequency_[k] * x[k];
            return std::polar(1.0, phase);
        }
    }
    return {};
}

Complex Evaluator::at(double x) const {
    switch (kind_) {
        case Kind::Monomial: {
            if (powers_.size() > 1) throw DomainError("multivariate monomial evaluated at a scalar");
            double v = 1.0;
            if (!powers_.empty()) {
                for (unsigned j = 0; j < powers_[0]; ++j) v *= x;
            }
            return {v, 0.0};
        }
        case Kind::Tabulated:
            if (coordinate_ != 0) throw DomainError("tabulated evaluator reads a coordinate other than 0");
            return {(*table_)(x), 0.0};
        case Kind::ComplexExp:
            if (frequency_.size() > 1) throw DomainError("multivariate exponential evaluated at a scalar");
            return std::polar(1.0, frequency_.empty() ? 0.0 : frequency_[0] * x);
    }
    return {};
}

bool Evaluator::is_constant_one() const {
    if (kind_ == Kind::Monomial) return powers_.empty();
    if (kind_ == Kind::ComplexExp) {
        return std::all_of(frequency_.begin(), frequency_.end(), [](double f) { return f == 0.0; });
    }
    return false;
}

bool Evaluator::is_real_valued() const { return kind_ != Kind::ComplexExp || is_constant_one(); }

std::size_t Evaluator::min_state_dim() const {
    switch (kind_) {
        case Kind::Monomial: return powers_.size();
        case Kind::Tabulated: return coordinate_ + 1;
        case Kind::ComplexExp: return frequency_.size();
    }
    return 0;
}

std::shared_ptr<const GradedBasis> GradedBasis::create(std::vector<BasisEntry> entries, ScalarField field) {
    if (entries.empty()) throw InputError("empty basis");

    std::size_t n_constant = 0;
    std::size_t constant_index = 0;
    std::set<std::string> labels;
    std::size_t state_dim = 1;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.label.empty()) throw InputError("basis entry " + std::to_string(i) + " has no label");
        if (!labels.insert(e.label).second) throw InputError("duplicate basis label '" + e.label + "'");
        if (i > 0 && e.degree < entries[i - 1].degree) {
            throw InputError("basis entries must be sorted by non-decreasing degree (entry '" +
                             e.label + "')");
        }
        if (e.degree == 0) {
            ++n_constant;
            constant_index = i;
            if (!e.eval.is_constant_one()) {
                throw InputError("degree-0 entry '" + e.label + "' is not the constant one");
            }
        } else if (e.eval.is_constant_one()) {
            throw InputError("constant entry '" + e.label + "' must have degree 0");
        }
        if (field == ScalarField::Real && !e.eval.is_real_valued()) {
            throw InputError("complex-valued entry '" + e.label + "' on a real basis");
        }
        state_dim = std::max(state_dim, e.eval.min_state_dim());
    }
    if (n_constant != 1) {
        throw InputError("basis needs exactly one degree-0 entry, found " + std::to_string(n_constant));
    }

    std::shared_ptr<GradedBasis> basis(new GradedBasis());
    basis->max_degree_ = entries.back().degree;
    basis->entries_ = std::move(entries);
    basis->field_ = field;
    basis->state_dim_ = state_dim;
    basis->constant_index_ = constant_index;
    return basis;
}

std::optional<std::size_t> GradedBasis::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].label == label) return i;
    }
    return std::nullopt;
}

std::size_t GradedBasis::require_index(const std::string& label) const {
    if (auto i = index_of(label)) return *i;
    throw InputError("unknown basis label '" + label + "'");
}

std::vector<std::size_t> GradedBasis::indices_of_degree(unsigned n) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].degree == n) out.push_back(i);
    }
    return out;
}

std::size_t GradedBasis::dim_upto(unsigned n) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                  [n](const BasisEntry& e) { return e.degree <= n; }));
}

namespace {

bool same_evaluator(const Evaluator& a, const Evaluator& b) {
    return a.kind() == b.kind() && a.powers() == b.powers() && a.frequency() == b.frequency() &&
           a.table() == b.table() && a.coordinate() == b.coordinate();
}

void require_state_dim(const GradedBasis& basis, const StatePoint& x) {
    if (x.dim() < basis.state_dim()) {
        throw DomainError("state point of dimension " + std::to_string(x.dim()) + " on a basis over dimension " +
                          std::to_string(basis.state_dim()));
    }
}

}  // namespace

// Separately built but identical bases are accepted.
void require_same_basis(const BasisPtr& a, const BasisPtr& b, const char* what) {
    if (a == b) return;
    bool same = a && b && a->field() == b->field() && a->size() == b->size();
    for (std::size_t i = 0; same && i < a->size(); ++i) {
        const auto& ea = a->entry(i);
        const auto& eb = b->entry(i);
        same = ea.label == eb.label && ea.degree == eb.degree && same_evaluator(ea.eval, eb.eval);
    }
    if (!same) throw BasisMismatch(std::string("basis mismatch in ") + what);
}

ComplexPolyVec to_complex(const PolyVec& p) {
    return ComplexPolyVec(p.basis(), p.coeffs().cast<Complex>());
}

double evaluate(const PolyVec& p, const StatePoint& x) {
    require_state_dim(*p.basis(), x);
    if (p.basis()->field() == ScalarField::Complex) {
        const Complex v = evaluate_complex(p, x);
        if (v.imag() != 0.0) throw DomainError("real evaluation of a complex-valued polynomial");
        return v.real();
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] != 0.0) sum += p[k] * p.basis()->entry(k).eval(x).real();
    }
    return sum;
}

Complex evaluate(const ComplexPolyVec& p, const StatePoint& x) {
    require_state_dim(*p.basis(), x);
    Complex sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] != Complex(0.0)) sum += p[k] * p.basis()->entry(k).eval(x);
    }
    return sum;
}

Complex evaluate_complex(const PolyVec& p, const StatePoint& x) {
    require_state_dim(*p.basis(), x);
    Complex sum = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] != 0.0) sum += p[k] * p.basis()->entry(k).eval(x);
    }
    return sum;
}

ScalarPolynomial::ScalarPolynomial(const PolyVec& p) : basis_(p.basis()) {
    if (basis_->state_dim() != 1) throw DomainError("scalar evaluation on a multivariate basis");
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] == 0.0) continue;
        const auto& e = basis_->entry(k).eval;
        unsigned power = 0;
        if (e.kind() == Evaluator::Kind::Monomial && !e.powers().empty()) power = e.powers()[0];
        terms_.push_back({p[k], &e, power});
        if (!e.is_real_valued()) real_valued_ = false;
    }
}

double ScalarPolynomial::operator()(double x) const {
    if (!real_valued_) throw DomainError("real evaluation of a complex-valued polynomial");
    double sum = 0.0;
    for (const auto& t : terms_) {
        if (t.eval->kind() == Evaluator::Kind::Monomial) {
            double v = 1.0;
            for (unsigned j = 0; j < t.power; ++j) v *= x;
            sum += t.coeff * v;
        } else {
            sum += t.coeff * t.eval->at(x).real();
        }
    }
    return sum;
}

Complex ScalarPolynomial::complex_at(double x) const {
    Complex sum = 0.0;
    for (const auto& t : terms_) sum += t.coeff * t.eval->at(x);
    return sum;
}

}  // namespace polyproc
