#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fiberpeel/config.hpp"
#include "fiberpeel/output.hpp"
#include "fiberpeel/solver.hpp"

namespace fiberpeel::scenario {

std::vector<std::string> preset_names();
/// Throws ValidationError for unknown names.
config::ScenarioConfig preset(const std::string& name);

/// Two-fiber model with beam, interaction and (if enabled) contact providers.
model::TwoFiberSystem build_system(const config::ScenarioConfig& config);

/// Reference force for the config's normalization experiment, cached per (fiber, E, supports).
double reference_force(const config::ScenarioConfig& config);
/// Same experiment with the run's own Young's modulus.
double own_reference_force(const config::ScenarioConfig& config);

struct RunOptions {
  std::filesystem::path out_dir;
  bool write_files = true;
  bool keep_states = false;
};

struct RunResult {
  std::string scenario;
  model::Branch branch = model::Branch::Contact;
  std::vector<output::CurveRecord> records;
  output::Summary summary;
  double f_ref = 0.0;
  double f_ref_own = 0.0;
  std::vector<double> min_gap;    // per record
  std::vector<double> min_gap_s;  // slave arc coordinate of the minimum gap
  std::vector<Vector> states;     // per record, when requested
  bool terminated = false;
  std::string termination_reason;
};

/// Runs one branch of a scenario without variants.
RunResult run(const config::ScenarioConfig& config, model::Branch branch, const RunOptions& options);

/// Runs every variant (or the config itself) into `out_dir/<variant>` (or `out_dir`).
std::vector<RunResult> run_all(const config::ScenarioConfig& config, model::Branch branch,
                               const RunOptions& options);

/// Initial guess with the right fiber rigidly translated by u.
model::SystemState shifted_state(const model::Model& model, double u);

}  // namespace fiberpeel::scenario
