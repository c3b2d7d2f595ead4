#include "polyproc/report_json.hpp"

#include <cmath>
#include <cstdio>

namespace polyproc {

namespace {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json complex_json(Complex c) {
    Json j = Json::object();
    j["re"] = number(c.real());
    j["im"] = number(c.imag());
    return j;
}

Json check_json(const ValidationCheck& c) {
    Json j = Json::object();
    j["name"] = c.name;
    j["statistic"] = number(c.statistic);
    j["standard_error"] = number(c.standard_error);
    j["allowance"] = number(c.allowance);
    j["threshold"] = number(c.threshold);
    j["pass"] = c.pass;
    return j;
}

void write(const Json& j, std::string& out) {
    switch (j.type()) {
        case Json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) out += ',';
                first = false;
                out += Json(k).dump();
                out += ':';
                write(v, out);
            }
            out += '}';
            break;
        }
        case Json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& v : j) {
                if (!first) out += ',';
                first = false;
                write(v, out);
            }
            out += ']';
            break;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
            } else {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out += buf;
            }
            break;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

Json to_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const Classification& c) {
    Json j = Json::object();
    j["kind"] = std::string(to_string(c.kind));
    if (c.lambda_ladder) {
        Json ladder = Json::array();
        for (double l : *c.lambda_ladder) ladder.push_back(number(l));
        j["lambda"] = std::move(ladder);
    } else {
        j["lambda"] = nullptr;
    }
    Json w = Json::array();
    for (const auto& g : c.witness) {
        Json row = Json::object();
        row["degree"] = g.degree;
        row["dim"] = g.dim;
        row["lambda"] = number(g.lambda);
        row["residual"] = number(g.residual);
        row["threshold"] = number(g.threshold);
        row["scalar"] = g.scalar;
        w.push_back(std::move(row));
    }
    j["witness"] = std::move(w);
    return j;
}

Json to_json(const AffineDriftData& d, const GradedBasis& basis) {
    Json j = Json::object();
    Json labels = Json::array();
    for (std::size_t k : d.linear_entries) labels.push_back(basis.entry(k).label);
    j["linear_entries"] = std::move(labels);
    Json b = Json::array();
    for (Eigen::Index k = 0; k < d.b.size(); ++k) b.push_back(number(d.b(k)));
    j["b"] = std::move(b);
    j["A"] = to_json(d.A);
    j["reconstruction_residual"] = number(d.reconstruction_residual);
    return j;
}

Json to_json(const PolyVec& p) {
    Json j = Json::array();
    for (std::size_t k = 0; k < p.size(); ++k) j.push_back(number(p[k]));
    return j;
}

Json to_json(const ComplexPolyVec& p) {
    Json j = Json::array();
    for (std::size_t k = 0; k < p.size(); ++k) j.push_back(complex_json(p[k]));
    return j;
}

Json to_json(const ActionResult& r) {
    Json j = Json::object();
    j["method"] = std::string(to_string(r.method));
    j["terms_used"] = r.terms_used;
    j["squarings"] = r.squarings;
    j["error_estimate"] = number(r.error_estimate);
    j["coefficients"] = to_json(r.result);
    return j;
}

Json to_json(const ValidationReport& r) {
    Json j = Json::object();
    j["test"] = r.test;
    j["pass"] = r.pass;
    j["statistic"] = number(r.statistic);
    j["standard_error"] = number(r.standard_error);
    j["tolerance_multiple"] = number(r.tolerance_multiple);
    j["clipped_fraction"] = number(r.clipped_fraction);
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    j["checks"] = std::move(checks);
    Json details = Json::array();
    for (const auto& d : r.details) {
        Json row = Json::object();
        row["time"] = number(d.time);
        row["quantity"] = d.quantity;
        row["sample"] = number(d.sample);
        row["reference"] = number(d.reference);
        row["standard_error"] = number(d.standard_error);
        details.push_back(std::move(row));
    }
    j["details"] = std::move(details);
    j["flags"] = r.flags;
    return j;
}

Json to_json(const ConsistencyReport& r) {
    Json j = Json::object();
    j["pass"] = r.pass;
    j["max_deviation"] = number(r.max_deviation);
    j["worst_entry"] = r.worst_entry;
    j["worst_x"] = number(r.worst_x);
    return j;
}

Json to_json(const TableValidation& r) {
    Json j = Json::object();
    j["pass"] = r.pass;
    j["max_error"] = number(r.max_error);
    j["points"] = r.points;
    j["failures"] = r.failures;
    return j;
}

Json to_json(const OutOfSpaceReport& r) {
    Json j = Json::object();
    j["t"] = number(r.t);
    j["N"] = r.N_list;
    Json b = Json::array();
    for (double v : r.b_norm_sq) b.push_back(number(v));
    j["b_norm_sq"] = std::move(b);
    Json in = Json::array();
    for (double v : r.integral_norm_sq) in.push_back(number(v));
    j["integral_norm_sq"] = std::move(in);
    j["b_unbounded"] = r.b_unbounded;
    j["last_change"] = number(r.last_change);
    j["converged"] = r.converged;
    j["quadrature_max_error"] = number(r.quadrature_max_error);
    j["quadrature_pass"] = r.quadrature_pass;
    j["pass"] = r.pass;
    return j;
}

std::string write_json(const Json& j) {
    std::string out;
    write(j, out);
    return out;
}

}  // namespace polyproc
