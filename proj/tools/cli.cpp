#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "polyproc/action.hpp"
#include "polyproc/drift_cov.hpp"
#include "polyproc/error.hpp"
#include "polyproc/generator.hpp"
#include "polyproc/model_io.hpp"
#include "polyproc/report_json.hpp"
#include "polyproc/sim_harness.hpp"
#include "polyproc/spectral.hpp"

#ifndef POLYPROC_DEFAULT_MODELS_DIR
#define POLYPROC_DEFAULT_MODELS_DIR ""
#endif

namespace polyproc::cli {

namespace {

namespace fs = std::filesystem;

// Bare names such as "ou.json" fall back to the bundled models directory.
fs::path resolve_model(const std::string& name) {
    const fs::path p(name);
    if (fs::exists(p)) return p;
    if (const char* env = std::getenv("POLYPROC_MODELS_DIR")) {
        if (fs::exists(fs::path(env) / p)) return fs::path(env) / p;
    }
    const fs::path bundled = fs::path(POLYPROC_DEFAULT_MODELS_DIR) / p;
    if (!p.has_parent_path() && fs::exists(bundled)) return bundled;
    throw InputError("model file not found: " + name);
}

StatePoint parse_point(const std::string& text, std::size_t dim) {
    std::vector<double> coords;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            coords.push_back(std::stod(item, &used));
            if (used != item.size()) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("state coordinate \"" + item + "\" is not a number");
        }
    }
    if (coords.size() != dim) {
        throw InputError("state point has " + std::to_string(coords.size()) + " coordinates, model needs " +
                         std::to_string(dim));
    }
    return StatePoint(std::move(coords));
}

std::shared_ptr<const ProcessModel> require_process(const LoadedModel& m) {
    if (!m.process) throw InputError("model \"" + m.name + "\" has no sde section");
    return m.process;
}

struct Common {
    std::string model;
    std::size_t threads = 1;
};

struct SimFlags {
    double T = 1.0;
    double dt = 1e-3;
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
};

void add_sim_flags(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--T", f.T, "Horizon")->capture_default_str();
    cmd->add_option("--dt", f.dt, "Euler step")->capture_default_str();
    cmd->add_option("--paths", f.paths, "Number of paths")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->required();
}

Json classify_cmd(const Common& c, double tol) {
    const LoadedModel m = load_model(resolve_model(c.model));
    Json j = Json::object();
    j["model"] = m.name;
    const Json cls = to_json(classify(*m.generator, tol));
    for (const auto& [k, v] : cls.items()) j[k] = v;
    j["grading_pass"] = check_grading(*m.generator).pass;
    if (!m.basis->indices_of_degree(1).empty()) j["drift_parts"] = to_json(drift_parts(*m.generator), *m.basis);
    return j;
}

Json moment_cmd(const Common& c, const std::string& p_text, double h, const std::string& x_text) {
    const LoadedModel m = load_model(resolve_model(c.model));
    const PolyVec p = parse_polynomial(m.basis, p_text);
    const StatePoint x = parse_point(x_text, m.basis->state_dim());
    const ActionResult r = act(*m.generator, p, h);
    Json j = Json::object();
    j["model"] = m.name;
    j["h"] = h;
    j["x"] = x.coords();
    const Complex value = evaluate_complex(r.result, x);
    if (m.basis->field() == ScalarField::Real) {
        j["value"] = value.real();
    } else {
        Json v = Json::object();
        v["re"] = value.real();
        v["im"] = value.imag();
        j["value"] = std::move(v);
    }
    const Json action = to_json(r);
    for (const auto& [k, v] : action.items()) j[k] = v;
    return j;
}

void dump_paths(const PathEnsemble& ens, const std::string& file, const std::string& format) {
    std::ofstream out(file);
    if (!out) throw InputError("cannot write " + file);
    std::vector<double> buffer(ens.n_times());
    if (format == "csv") {
        out << "path";
        for (std::size_t k = 0; k < ens.n_times(); ++k) out << ',' << write_json(Json(ens.grid().time(k)));
        out << '\n';
        for (std::size_t i = 0; i < ens.n_paths(); ++i) {
            ens.path(i, buffer);
            out << i;
            for (double v : buffer) out << ',' << write_json(Json(v));
            out << '\n';
        }
        return;
    }
    Json j = Json::object();
    Json times = Json::array();
    for (std::size_t k = 0; k < ens.n_times(); ++k) times.push_back(ens.grid().time(k));
    j["time"] = std::move(times);
    Json paths = Json::array();
    for (std::size_t i = 0; i < ens.n_paths(); ++i) {
        ens.path(i, buffer);
        paths.push_back(buffer);
    }
    j["paths"] = std::move(paths);
    out << write_json(j) << '\n';
}

Json simulate_cmd(const Common& c, const SimFlags& f, const std::string& dump, const std::string& format) {
    const LoadedModel m = load_model(resolve_model(c.model));
    SimulationOptions opts;
    opts.threads = c.threads;
    const PathEnsemble ens = simulate(require_process(m), f.T, f.dt, f.paths, f.seed, opts);
    const auto terminal = ens.map_paths<double>(
        [&](std::size_t, std::span<const double> xs) { return xs.back(); });
    const SampleMoments mt = sample_moments(terminal);
    Json j = Json::object();
    j["model"] = m.name;
    j["seed"] = f.seed;
    j["paths"] = f.paths;
    j["steps"] = ens.grid().steps;
    j["dt"] = f.dt;
    j["T"] = ens.grid().horizon();
    j["clipped_fraction"] = ens.clipped_fraction();
    j["terminal_mean"] = mt.mean;
    j["terminal_sd"] = mt.sd;
    j["terminal_se"] = mt.se;
    if (!dump.empty()) {
        dump_paths(ens, dump, format);
        j["dump"] = dump;
        j["format"] = format;
    }
    return j;
}

struct ValidateFlags {
    std::string test = "moment";
    std::string p;
    std::string q;
    std::optional<double> h;
    double s = 0.25;
    double t = 0.75;
};

Json validate_cmd(const Common& c, const SimFlags& f, const ValidateFlags& v, bool& pass) {
    const LoadedModel m = load_model(resolve_model(c.model));
    const auto process = require_process(m);
    if (v.test == "consistency") {
        const ConsistencyReport r = check_generator_consistency(*process);
        pass = r.pass;
        Json j = Json::object();
        j["model"] = m.name;
        j["pass"] = r.pass;
        j["consistency"] = to_json(r);
        return j;
    }
    if (v.p.empty()) throw InputError("validate needs --p");
    const PolyVec p = parse_polynomial(m.basis, v.p);
    SimulationOptions opts;
    opts.threads = c.threads;
    const PathEnsemble ens = simulate(process, f.T, f.dt, f.paths, f.seed, opts);
    const double h = v.h.value_or(f.T);

    std::vector<ValidationReport> reports;
    const bool all = v.test == "all";
    if (all || v.test == "moment") {
        if (m.basis->field() == ScalarField::Complex && m.psi) {
            reports.push_back(eigen_mc_test(ens, *m.psi, to_complex(p), h));
        } else {
            reports.push_back(moment_mc_test(ens, *m.generator, p, h));
        }
    }
    if (all || v.test == "martingale") {
        reports.push_back(martingale_residual_test(ens, *m.generator, p, v.s, v.t));
    }
    if (all || v.test == "covariation") {
        const PolyVec q = v.q.empty() ? p : parse_polynomial(m.basis, v.q);
        reports.push_back(covariation_test(ens, *m.generator, m.products, p, q));
    }
    if (v.test == "eigen") {
        if (!m.psi) throw InputError("model has no psi section");
        reports.push_back(eigen_mc_test(ens, *m.psi, to_complex(p), h));
    }
    if (reports.empty()) throw InputError("unknown test \"" + v.test + "\"");

    pass = true;
    Json list = Json::array();
    for (const auto& r : reports) {
        pass = pass && r.pass;
        list.push_back(to_json(r));
    }
    Json j = Json::object();
    j["model"] = m.name;
    j["seed"] = f.seed;
    j["paths"] = f.paths;
    j["dt"] = f.dt;
    j["T"] = ens.grid().horizon();
    j["pass"] = pass;
    j["reports"] = std::move(list);
    return j;
}

struct SpectralFlags {
    double t = 0.5;
    std::string n_list = "100,1000,10000";
    std::size_t paths = 10000;
    std::uint64_t seed = 0;
    std::size_t sim_n = 16;
    std::size_t steps = 50;
};

Json spectral_cmd(const Common& c, const SpectralFlags& f, bool& pass) {
    const auto n_list = parse_size_list(f.n_list);
    const OutOfSpaceReport oos = out_of_space_report(f.t, n_list);
    const auto model = TruncatedSpectralModel::create(f.sim_n, f.t, f.steps);
    const SpectralEnsemble ens = simulate_spectral_ou(model, f.paths, f.seed, c.threads);
    pass = oos.pass && ens.report.pass;

    Json j = Json::object();
    const Json o = to_json(oos);
    j["t"] = o["t"];
    j["N"] = o["N"];
    j["b_norm_sq"] = o["b_norm_sq"];
    j["integral_norm_sq"] = o["integral_norm_sq"];
    j["out_of_space"] = o;
    const Json sim = to_json(ens.report);
    j["moment_checks"] = sim["checks"];
    j["moment_details"] = sim["details"];
    j["simulation"] = {{"N", f.sim_n}, {"paths", f.paths}, {"steps", f.steps}, {"seed", f.seed}};
    j["pass"] = pass;
    return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Polynomial process toolkit", "polyproc"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* cmd, bool model) {
        if (model) cmd->add_option("--model", common.model, "Model JSON file")->required();
        cmd->add_option("--threads", common.threads, "Worker threads")->capture_default_str()
            ->check(CLI::PositiveNumber);
    };

    double tol = kDefaultClassifyTol;
    auto* classify_app = app.add_subcommand("classify", "Classify the generator and report drift parts");
    add_common(classify_app, true);
    classify_app->add_option("--tol", tol, "Scalar-block tolerance")->capture_default_str();

    std::string p_text;
    double h = 1.0;
    std::string x_text = "0";
    auto* moment_app = app.add_subcommand("moment", "Conditional moment (T_h p)(x)");
    add_common(moment_app, true);
    moment_app->add_option("--p", p_text, "Coefficients in basis order")->required();
    moment_app->add_option("--h", h, "Time step")->capture_default_str();
    moment_app->add_option("--x", x_text, "State point, comma-separated")->capture_default_str();

    SimFlags sim;
    std::string dump;
    std::string format = "json";
    auto* simulate_app = app.add_subcommand("simulate", "Euler-Maruyama ensemble summary");
    add_common(simulate_app, true);
    add_sim_flags(simulate_app, sim);
    simulate_app->add_option("--dump", dump, "Write all paths to this file");
    simulate_app->add_option("--format", format, "Path dump format")->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    ValidateFlags vf;
    double h_opt = 0.0;
    auto* validate_app = app.add_subcommand("validate", "Monte-Carlo validation of the generator");
    add_common(validate_app, true);
    add_sim_flags(validate_app, sim);
    validate_app->add_option("--p", vf.p, "Coefficients in basis order");
    validate_app->add_option("--q", vf.q, "Second polynomial for the covariation test");
    auto* h_flag = validate_app->add_option("--h", h_opt, "Moment horizon (defaults to T)");
    validate_app->add_option("--s", vf.s, "Martingale start time")->capture_default_str();
    validate_app->add_option("--t", vf.t, "Martingale end time")->capture_default_str();
    validate_app->add_option("--test", vf.test, "moment|martingale|covariation|eigen|consistency|all")
        ->check(CLI::IsMember({"moment", "martingale", "covariation", "eigen", "consistency", "all"}))
        ->capture_default_str();

    SpectralFlags sf;
    auto* spectral_app = app.add_subcommand("demo-spectral", "Truncated rotation-group demo");
    add_common(spectral_app, false);
    spectral_app->add_option("--t", sf.t, "Time")->capture_default_str();
    spectral_app->add_option("--N-list", sf.n_list, "Truncations, comma-separated")->capture_default_str();
    spectral_app->add_option("--paths", sf.paths, "Monte-Carlo paths")->capture_default_str();
    spectral_app->add_option("--seed", sf.seed, "Random seed")->required();
    spectral_app->add_option("--sim-N", sf.sim_n, "Coordinates simulated")->capture_default_str();
    spectral_app->add_option("--steps", sf.steps, "Grid steps up to t")->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kPass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    try {
        Json report;
        bool pass = true;
        if (*classify_app) {
            report = classify_cmd(common, tol);
        } else if (*moment_app) {
            report = moment_cmd(common, p_text, h, x_text);
        } else if (*simulate_app) {
            report = simulate_cmd(common, sim, dump, format);
        } else if (*validate_app) {
            if (*h_flag) vf.h = h_opt;
            report = validate_cmd(common, sim, vf, pass);
        } else if (*spectral_app) {
            report = spectral_cmd(common, sf, pass);
        }
        out << write_json(report) << '\n';
        return pass ? kPass : kValidationFailure;
    } catch (const SimulationError& e) {
        err << "simulation error: " << e.what() << '\n';
        return kValidationFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace polyproc::cli
