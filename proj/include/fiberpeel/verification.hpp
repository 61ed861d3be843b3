#pragma once

#include <string>
#include <vector>

#include "fiberpeel/config.hpp"
#include "fiberpeel/model.hpp"

namespace fiberpeel::verification {

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// Max |FD - K| / max |K| over the given free-DOF columns of the assembled tangent
/// (all free columns if `columns` is empty).
double assembled_tangent_error(const model::Model& model, const Vector& q, double step,
                               const std::vector<std::size_t>& columns = {});

/// Sum of interaction and contact forces over all position DOFs, relative to the largest entry.
double force_balance_error(const model::Model& model, const Vector& q);

struct RollUpResult {
  std::vector<int> n_elements;
  std::vector<double> error;  // |tip - base| / l after rolling up to a full circle
  double rate = 0.0;          // observed order between the two finest meshes
};

/// Cantilever under end moment 2 pi EI / l rolled into a full circle.
RollUpResult roll_up_benchmark(const std::vector<int>& meshes = {4, 8, 16, 32});

/// Property suite for the model described by `config` (tangents, invariances, balances,
/// penalty knots, cutoff schedule, quadrature convergence, SIMD equivalence, roll-up).
std::vector<Check> run_property_suite(const config::ScenarioConfig& config, unsigned seed = 20240601);

}  // namespace fiberpeel::verification
