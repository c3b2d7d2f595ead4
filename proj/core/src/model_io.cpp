#include "polyproc/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace polyproc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw InputError(where + ": " + what);
}

const json& field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
    return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_number()) fail(where, std::string("\"") + key + "\" must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, std::string("\"") + key + "\" must be finite");
    return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::string text(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    if (!v.is_string()) fail(where, std::string("\"") + key + "\" must be a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) fail(where, "expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

Evaluator parse_eval(const json& e, const std::string& where) {
    const std::string type = text(e, "type", where);
    if (type == "constant") return Evaluator::constant_one();
    if (type == "monomial") {
        std::vector<unsigned> powers;
        for (const auto& p : field(e, "powers", where)) {
            if (!p.is_number_unsigned()) fail(where, "powers must be non-negative integers");
            powers.push_back(p.get<unsigned>());
        }
        return Evaluator::monomial(std::move(powers));
    }
    if (type == "cexp") return Evaluator::complex_exp(numbers(field(e, "freq", where), where));
    if (type == "sigma_ode_u") {
        const double x_max = number(e, "x_max", where);
        const double step = number(e, "step", where);
        return Evaluator::tabulated(std::make_shared<const TabulatedFunction>(solve_sigma_ode(x_max, step)));
    }
    fail(where, "unknown eval type \"" + type + "\"");
}

BasisPtr parse_basis(const json& b) {
    const std::string where = "basis";
    ScalarField field_kind = ScalarField::Real;
    if (b.contains("field")) {
        const std::string f = text(b, "field", where);
        if (f == "complex") {
            field_kind = ScalarField::Complex;
        } else if (f != "real") {
            fail(where, "field must be \"real\" or \"complex\"");
        }
    }
    const json& list = field(b, "entries", where);
    if (!list.is_array() || list.empty()) fail(where, "entries must be a non-empty array");
    std::vector<BasisEntry> entries;
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string at = "basis entry " + std::to_string(k);
        const json& e = list[k];
        const json& deg = field(e, "degree", at);
        if (!deg.is_number_unsigned()) fail(at, "degree must be a non-negative integer");
        entries.push_back({text(e, "label", at), deg.get<unsigned>(), parse_eval(field(e, "eval", at), at)});
    }
    try {
        return GradedBasis::create(std::move(entries), field_kind);
    } catch (const InputError&) {
        throw;
    } catch (const Error& err) {
        fail(where, err.what());
    }
}

std::shared_ptr<const GeneratorMatrix> parse_generator(const json& g, const BasisPtr& basis) {
    const std::string where = "generator";
    const json& cols = field(g, "matrix", where);
    const auto n = basis->size();
    if (!cols.is_array() || cols.size() != n) {
        fail(where, "matrix needs " + std::to_string(n) + " columns, one per basis entry");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const auto col = numbers(cols[j], where + " column " + std::to_string(j));
        if (col.size() != n) fail(where, "column " + std::to_string(j) + " has the wrong length");
        for (std::size_t i = 0; i < n; ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    if (!m.allFinite()) fail(where, "matrix entries must be finite");
    auto out = std::make_shared<const GeneratorMatrix>(basis, std::move(m));
    require_grading(*out);
    return out;
}

PolyVec parse_combination(const json& obj, const BasisPtr& basis, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object of label: coefficient");
    PolyVec p = PolyVec::zero(basis);
    Eigen::VectorXd c = p.coeffs();
    for (const auto& [label, value] : obj.items()) {
        const auto idx = basis->index_of(label);
        if (!idx) fail(where, "unknown label \"" + label + "\"");
        if (!value.is_number()) fail(where, "coefficient of \"" + label + "\" must be a number");
        c(static_cast<Eigen::Index>(*idx)) = value.get<double>();
    }
    return PolyVec(basis, std::move(c));
}

ProductTable parse_products(const json& doc, const BasisPtr& basis) {
    ProductTable table = ProductTable::derive(basis);
    if (!doc.contains("products")) return table;
    const json& list = doc.at("products");
    if (!list.is_array()) fail("products", "expected an array");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "product " + std::to_string(k);
        const auto i = basis->index_of(text(list[k], "i", where));
        const auto j = basis->index_of(text(list[k], "j", where));
        if (!i || !j) fail(where, "unknown label");
        table.set(*i, *j, parse_combination(field(list[k], "result", where), basis, where));
    }
    return table;
}

std::shared_ptr<const ProcessModel> parse_sde(const json& s, const std::string& name,
                                              const std::shared_ptr<const GeneratorMatrix>& generator) {
    const std::string where = "sde";
    if (generator->basis()->state_dim() != 1) fail(where, "simulation supports scalar states only");
    auto model = std::make_shared<ProcessModel>();
    model->name = name;
    model->generator = generator;

    const json& drift = field(s, "drift", where);
    const std::string df = text(drift, "family", "sde.drift");
    if (df == "zero") {
        model->drift = [](double) { return 0.0; };
    } else if (df == "linear") {
        const double mu = number_or(drift, "mu", 0.0, "sde.drift");
        const double gamma = number_or(drift, "gamma", 0.0, "sde.drift");
        model->drift = [mu, gamma](double x) { return mu + gamma * x; };
    } else {
        fail("sde.drift", "unknown family \"" + df + "\"");
    }

    const json& sigma = field(s, "sigma", where);
    const std::string sf = text(sigma, "family", "sde.sigma");
    if (sf == "constant") {
        const double v = number(sigma, "sigma", "sde.sigma");
        model->sigma = [v](double) { return v; };
    } else if (sf == "proportional") {
        const double v = number(sigma, "sigma", "sde.sigma");
        model->sigma = [v](double x) { return v * std::abs(x); };
    } else if (sf == "sqrt_affine") {
        const double s0 = number_or(sigma, "s0", 0.0, "sde.sigma");
        const double s1 = number_or(sigma, "s1", 0.0, "sde.sigma");
        const double s2 = number_or(sigma, "s2", 0.0, "sde.sigma");
        model->sigma = [s0, s1, s2](double x) { return std::sqrt(std::max(0.0, s0 + s1 * x + s2 * x * x)); };
    } else if (sf == "sqrt_entry") {
        const auto& basis = generator->basis();
        const auto idx = basis->index_of(text(sigma, "entry", "sde.sigma"));
        if (!idx) fail("sde.sigma", "unknown entry label");
        const Evaluator eval = basis->entry(*idx).eval;
        if (!eval.is_real_valued()) fail("sde.sigma", "entry must be real-valued");
        model->sigma = [eval](double x) { return std::sqrt(std::max(0.0, eval.at(x).real())); };
    } else {
        fail("sde.sigma", "unknown family \"" + sf + "\"");
    }

    model->x0 = number(s, "x0", where);
    model->state_range = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    if (s.contains("range")) {
        const auto r = numbers(s.at("range"), "sde.range");
        if (r.size() != 2 || !(r[0] < r[1])) fail("sde.range", "expected [lo, hi] with lo < hi");
        model->state_range = {r[0], r[1]};
    }
    if (!model->state_range.contains(model->x0)) fail(where, "x0 outside the range");
    return model;
}

LevyExponent parse_psi(const json& p, const std::string& where) {
    const std::string family = text(p, "family", where);
    if (family == "gaussian") {
        std::vector<double> drift;
        if (p.contains("drift")) {
            drift = p.at("drift").is_number() ? std::vector<double>{p.at("drift").get<double>()}
                                              : numbers(p.at("drift"), where);
        }
        return LevyExponent::gaussian(std::move(drift), number(p, "sigma", where));
    }
    if (family == "poisson") {
        const json& jump = field(p, "jump", where);
        std::vector<double> j = jump.is_number() ? std::vector<double>{jump.get<double>()} : numbers(jump, where);
        return LevyExponent::poisson(number(p, "rate", where), std::move(j));
    }
    if (family == "compound") {
        std::vector<LevyExponent> parts;
        for (const auto& part : field(p, "parts", where)) parts.push_back(parse_psi(part, where));
        return LevyExponent::compound(std::move(parts));
    }
    fail(where, "unknown family \"" + family + "\"");
}

}  // namespace

LoadedModel parse_model(const json& doc) {
    if (!doc.is_object()) fail("model", "top level must be an object");
    const json& version = field(doc, "schema_version", "model");
    if (!version.is_number_integer() || version.get<int>() != kModelSchemaVersion) {
        fail("model", "unsupported schema_version (expected " + std::to_string(kModelSchemaVersion) + ")");
    }
    const std::string name = doc.contains("name") ? text(doc, "name", "model") : "model";
    BasisPtr basis = parse_basis(field(doc, "basis", "model"));
    auto generator = parse_generator(field(doc, "generator", "model"), basis);
    LoadedModel out{name, basis, generator, parse_products(doc, basis), nullptr, std::nullopt};
    if (doc.contains("sde")) out.process = parse_sde(doc.at("sde"), name, generator);
    if (doc.contains("psi")) out.psi = parse_psi(doc.at("psi"), "psi");
    return out;
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("malformed JSON in " + path.string() + ": " + e.what());
    }
    return parse_model(doc);
}

PolyVec parse_polynomial(const BasisPtr& basis, const std::string& text_in) {
    std::vector<double> values;
    std::stringstream ss(text_in);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InputError("polynomial coefficient \"" + item + "\" is not a number");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
            throw InputError("polynomial coefficient \"" + item + "\" is not a number");
        }
        values.push_back(v);
    }
    if (values.size() != basis->size()) {
        throw InputError("polynomial has " + std::to_string(values.size()) + " coefficients, basis has " +
                         std::to_string(basis->size()));
    }
    return PolyVec::from(basis, values);
}

std::vector<std::size_t> parse_size_list(const std::string& text_in) {
    std::vector<std::size_t> out;
    std::stringstream ss(text_in);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            throw InputError("\"" + item + "\" is not a positive integer");
        }
        if (used != item.size() || v == 0 || item.find('-') != std::string::npos) {
            throw InputError("\"" + item + "\" is not a positive integer");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw InputError("empty integer list");
    return out;
}

}  // namespace polyproc
