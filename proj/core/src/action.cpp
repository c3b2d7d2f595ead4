#include "polyproc/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace polyproc {

namespace {

// ||hG|| above this makes the series terms overflow before they shrink.
constexpr double kMaxSeriesNorm = 600.0;
constexpr std::size_t kMaxSeriesTerms = 5000;

void require_finite_time(double h) {
    if (!std::isfinite(h)) throw DomainError("non-finite time step h");
}

double one_norm(const Eigen::MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

std::string_view to_string(ActionMethod method) {
    switch (method) {
        case ActionMethod::SeriesTruncated: return "SeriesTruncated";
        case ActionMethod::ScalingSquaring: return "ScalingSquaring";
        case ActionMethod::NilpotentExact: return "NilpotentExact";
        case ActionMethod::EigenDiagonal: return "EigenDiagonal";
    }
    return "?";
}

Eigen::MatrixXd expm_scaling_squaring(const Eigen::MatrixXd& m, std::size_t* squarings) {
    if (m.rows() != m.cols()) throw DomainError("matrix exponential of a non-square matrix");
    if (!m.allFinite()) throw DomainError("matrix exponential of a non-finite matrix");
    const double norm = one_norm(m);
    const auto s = static_cast<int>(std::ceil(std::log2(std::max(1.0, norm))));
    const Eigen::MatrixXd scaled = m / std::ldexp(1.0, s);

    // Horner: I + B(I + B/2(I + B/3(...)))
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(m.rows(), m.cols());
    Eigen::MatrixXd e = identity;
    for (std::size_t k = kScaledTaylorDegree; k >= 1; --k) {
        e = identity + (scaled * e) / static_cast<double>(k);
    }
    for (int i = 0; i < s; ++i) e = e * e;
    if (squarings) *squarings = static_cast<std::size_t>(s);
    return e;
}

ActionResult act_scaling_squaring(const GeneratorMatrix& g, const PolyVec& p, double h) {
    require_same_basis(g.basis(), p.basis(), "polynomial action");
    require_finite_time(h);
    require_grading(g);
    std::size_t squarings = 0;
    const Eigen::MatrixXd e = expm_scaling_squaring(h * g.matrix(), &squarings);
    return ActionResult{PolyVec(p.basis(), e * p.coeffs()), ActionMethod::ScalingSquaring,
                        kScaledTaylorDegree + 1, 0.0, squarings};
}

ActionResult act_series(const GeneratorMatrix& g, const PolyVec& p, double h) {
    require_same_basis(g.basis(), p.basis(), "polynomial action");
    require_finite_time(h);
    require_grading(g);

    const double p_norm1 = p.coeffs().lpNorm<1>();
    if (p_norm1 == 0.0) {
        return ActionResult{p, ActionMethod::SeriesTruncated, 1, 0.0, 0};
    }
    const double a = std::abs(h) * one_norm(g.matrix());
    if (a > kMaxSeriesNorm) {
        throw DomainError("series route infeasible: |hG|_1 = " + std::to_string(a));
    }

    const KrylovSubspace krylov = krylov_invariant_subspace(g, p);
    const Eigen::MatrixXd hh = h * krylov.projected;
    const Eigen::VectorXd start = krylov.basis.transpose() * p.coeffs();

    if ((hh * start).isZero(0.0)) {
        return ActionResult{p, ActionMethod::SeriesTruncated, 1, 0.0, 0};
    }

    Eigen::VectorXd term = start;
    Eigen::VectorXd sum = start;
    const double log_target = std::log(kSeriesRemainderTol);
    std::size_t k = 0;
    double bound = 0.0;
    while (true) {
        // Remainder after terms 0..k: a^{k+1}/(k+1)! e^a |p|.
        if (a == 0.0) {
            bound = 0.0;
            break;
        }
        const double log_bound = static_cast<double>(k + 1) * std::log(a) -
                                 std::lgamma(static_cast<double>(k + 2)) + a + std::log(p_norm1);
        if (log_bound < log_target) {
            bound = std::exp(log_bound);
            break;
        }
        if (k + 1 >= kMaxSeriesTerms) {
            throw DomainError("series did not reach its remainder target");
        }
        ++k;
        term = hh * term / static_cast<double>(k);
        if (term.isZero(0.0)) {
            // Nilpotent on the Krylov span: the sum is already exact.
            bound = 0.0;
            break;
        }
        sum += term;
    }
    return ActionResult{PolyVec(p.basis(), krylov.basis * sum), ActionMethod::SeriesTruncated, k + 1,
                        bound, 0};
}

ActionResult act(const GeneratorMatrix& g, const PolyVec& p, double h) {
    ActionResult out = act_scaling_squaring(g, p, h);
    try {
        const ActionResult series = act_series(g, p, h);
        const double scale = std::max(1.0, out.result.coeffs().lpNorm<Eigen::Infinity>());
        out.error_estimate =
            (series.result.coeffs() - out.result.coeffs()).lpNorm<Eigen::Infinity>() / scale;
    } catch (const DomainError&) {
        out.error_estimate = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

ActionResult act_nilpotent(const GeneratorMatrix& g, const PolyVec& p, double h, double tol) {
    require_same_basis(g.basis(), p.basis(), "polynomial action");
    require_finite_time(h);
    if (classify(g, tol).kind != GeneratorKind::StronglyReducing) {
        throw NotStronglyReducing("exact finite action needs a strongly reducing generator");
    }
    const unsigned n = degree(p);
    Eigen::VectorXd term = p.coeffs();
    Eigen::VectorXd sum = term;
    for (unsigned k = 1; k <= n; ++k) {
        term = h * (g.matrix() * term) / static_cast<double>(k);
        sum += term;
    }
    return ActionResult{PolyVec(p.basis(), std::move(sum)), ActionMethod::NilpotentExact,
                        static_cast<std::size_t>(n) + 1, 0.0, 0};
}

double conditional_moment(const GeneratorMatrix& g, const PolyVec& p, double h, const StatePoint& x) {
    return evaluate(act(g, p, h).result, x);
}

Complex conditional_moment_complex(const GeneratorMatrix& g, const PolyVec& p, double h,
                                   const StatePoint& x) {
    return evaluate_complex(act(g, p, h).result, x);
}

LevyExponent LevyExponent::gaussian(std::vector<double> drift, double sigma) {
    if (!std::isfinite(sigma) || sigma < 0.0) throw InputError("Gaussian exponent needs sigma >= 0");
    LevyExponent e;
    e.kind_ = Kind::Gaussian;
    e.vec_ = std::move(drift);
    e.scalar_ = sigma;
    return e;
}

LevyExponent LevyExponent::poisson(double rate, std::vector<double> jump) {
    if (!std::isfinite(rate) || rate < 0.0) throw InputError("Poisson exponent needs rate >= 0");
    LevyExponent e;
    e.kind_ = Kind::Poisson;
    e.vec_ = std::move(jump);
    e.scalar_ = rate;
    return e;
}

LevyExponent LevyExponent::tabulated(std::vector<std::pair<std::vector<double>, Complex>> values) {
    LevyExponent e;
    e.kind_ = Kind::Tabulated;
    e.table_ = std::move(values);
    return e;
}

LevyExponent LevyExponent::compound(std::vector<LevyExponent> parts) {
    LevyExponent e;
    e.kind_ = Kind::Compound;
    e.parts_ = std::move(parts);
    return e;
}

Complex LevyExponent::operator()(std::span<const double> u) const {
    auto dot = [&u](const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * (k < v.size() ? v[k] : 0.0);
        return s;
    };
    switch (kind_) {
        case Kind::Gaussian: {
            double u2 = 0.0;
            for (double c : u) u2 += c * c;
            return {-0.5 * scalar_ * scalar_ * u2, dot(vec_)};
        }
        case Kind::Poisson:
            return scalar_ * (std::polar(1.0, dot(vec_)) - 1.0);
        case Kind::Tabulated: {
            bool zero = true;
            for (double c : u) zero = zero && c == 0.0;
            if (zero) return 0.0;
            for (const auto& [freq, value] : table_) {
                if (freq.size() == u.size() && std::equal(freq.begin(), freq.end(), u.begin())) return value;
            }
            throw DomainError("Levy exponent not tabulated at the requested frequency");
        }
        case Kind::Compound: {
            Complex s = 0.0;
            for (const auto& part : parts_) s += part(u);
            return s;
        }
    }
    return 0.0;
}

ComplexPolyVec eigen_act(const LevyExponent& psi, const ComplexPolyVec& p, double h) {
    if (!std::isfinite(h) || h < 0.0) throw DomainError("eigen action needs a finite h >= 0");
    const auto& basis = *p.basis();
    auto c = p.coeffs();
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto& e = basis.entry(k).eval;
        if (k == basis.constant_index()) continue;
        if (e.kind() != Evaluator::Kind::ComplexExp) {
            throw InputError("eigen action needs a basis of complex exponentials, entry '" +
                             basis.entry(k).label + "' is not one");
        }
        const auto i = static_cast<Eigen::Index>(k);
        if (c(i) != Complex(0.0)) c(i) *= std::exp(h * psi(e.frequency()));
    }
    return ComplexPolyVec(p.basis(), std::move(c));
}

}  // namespace polyproc
