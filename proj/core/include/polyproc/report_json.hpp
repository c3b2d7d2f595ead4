#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "polyproc/action.hpp"
#include "polyproc/drift_cov.hpp"
#include "polyproc/generator.hpp"
#include "polyproc/sim_harness.hpp"
#include "polyproc/spectral.hpp"

namespace polyproc {

using Json = nlohmann::ordered_json;

Json to_json(const Classification& c);
Json to_json(const AffineDriftData& d, const GradedBasis& basis);
Json to_json(const ActionResult& r);
Json to_json(const ValidationReport& r);
Json to_json(const ConsistencyReport& r);
Json to_json(const TableValidation& r);
Json to_json(const OutOfSpaceReport& r);
Json to_json(const PolyVec& p);
Json to_json(const ComplexPolyVec& p);
Json to_json(const Eigen::MatrixXd& m);

/// Compact single-line JSON: insertion key order, doubles with 17
/// significant digits, non-finite numbers as null.
std::string write_json(const Json& j);

}  // namespace polyproc
