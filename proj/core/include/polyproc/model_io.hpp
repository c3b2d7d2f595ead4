#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyproc/action.hpp"
#include "polyproc/drift_cov.hpp"
#include "polyproc/generator.hpp"
#include "polyproc/graded_space.hpp"
#include "polyproc/sim_harness.hpp"

namespace polyproc {

inline constexpr int kModelSchemaVersion = 1;

/// A parsed model file. `process` is null when the file has no "sde"
/// section and `psi` is empty when it has no "psi" section.
struct LoadedModel {
    std::string name;
    BasisPtr basis;
    std::shared_ptr<const GeneratorMatrix> generator;
    ProductTable products;
    std::shared_ptr<const ProcessModel> process;
    std::optional<LevyExponent> psi;
};

/// Schema (version 1):
///   { "schema_version": 1, "name": str,
///     "basis": { "field": "real"|"complex",
///                "entries": [ { "label", "degree",
///                               "eval": {"type": "constant"}
///                                     | {"type": "monomial", "powers": [..]}
///                                     | {"type": "cexp", "freq": [..]}
///                                     | {"type": "sigma_ode_u", "x_max", "step"} } ] },
///     "generator": { "matrix": [ column of G(entry 0), column of G(entry 1), ... ] },
///     "products": [ { "i": label, "j": label, "result": { label: coeff } } ],   optional
///     "sde": { "drift": {"family": "zero"} | {"family": "linear", "mu", "gamma"},
///              "sigma": {"family": "constant", "sigma"} | {"family": "proportional", "sigma"}
///                     | {"family": "sqrt_affine", "s0", "s1", "s2"} | {"family": "sqrt_entry", "entry"},
///              "x0", "range": [lo, hi] },                                         optional
///     "psi": { "family": "gaussian", "drift", "sigma" } | { "family": "poisson", "rate", "jump" }
///          | { "family": "compound", "parts": [..] } }                           optional
/// Throws InputError on schema problems and GradingError on a generator that
/// breaks the grading.
LoadedModel parse_model(const nlohmann::json& doc);
LoadedModel load_model(const std::filesystem::path& path);

/// Comma-separated coefficients in basis order, e.g. "0,0,1".
PolyVec parse_polynomial(const BasisPtr& basis, const std::string& text);
/// Comma-separated positive integers, e.g. "100,1000,10000".
std::vector<std::size_t> parse_size_list(const std::string& text);

}  // namespace polyproc
