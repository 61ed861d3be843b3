#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fiberpeel/contact.hpp"
#include "fiberpeel/interaction.hpp"
#include "fiberpeel/model.hpp"
#include "fiberpeel/solver.hpp"

namespace fiberpeel::config {

using Json = nlohmann::json;

struct QuadratureConfig {
  int n_segments = 2;
  int n_gp = 10;
  bool operator==(const QuadratureConfig&) const = default;
};

struct FiberConfig {
  double length = 5.0;
  double radius = 0.02;
  double youngs_modulus = 1e5;
  double poisson_ratio = 0.3;
  int n_elements = 16;
  bool operator==(const FiberConfig&) const = default;
};

struct GeometryConfig {
  double separation = 0.04;  // initial inter-axis distance
  model::SupportType supports = model::SupportType::PinRoller;
  bool operator==(const GeometryConfig&) const = default;
};

enum class InteractionType { None, Electrostatic, LennardJones };

struct InteractionConfig {
  InteractionType type = InteractionType::Electrostatic;
  double sigma1 = 1.0;
  double sigma2 = -1.0;
  double k = 0.1;
  double rho1 = 1.0;
  double rho2 = 1.0;
  double k_vdw = -1e-7;
  double k_replj = 5e-25;
  std::optional<double> g_reg;           // absolute regularization gap
  std::optional<double> g_reg_over_g_eq;  // or relative to the parallel-fiber equilibrium gap
  bool allow_reg_above_equilibrium = false;
  std::optional<double> cutoff_radius;
  QuadratureConfig quadrature{2, 10};
  bool operator==(const InteractionConfig&) const = default;
};

struct ContactConfig {
  bool enabled = true;
  double penalty = 100.0;
  double gbar = 0.002;
  QuadratureConfig quadrature{20, 5};
  bool operator==(const ContactConfig&) const = default;
};

struct SweepConfig {
  double u_start = 0.0;
  double u_end = 4.5;
  double step_initial = 0.005;
  double step_min = 1e-6;
  double step_max = 0.025;
  double growth = 1.5;
  /// Minimum gap separating "in contact" from "separated"; null picks a law-specific default.
  std::optional<double> contact_gap_threshold;
  bool operator==(const SweepConfig&) const = default;
};

struct UnstableConfig {
  std::vector<double> u_values;
  bool operator==(const UnstableConfig&) const = default;
};

struct SolverConfig {
  std::optional<double> tol_residual;   // null: 1e-8 EA/l
  std::optional<double> tol_increment;  // null: 1e-10 l
  int max_iter = 50;
  double du_max = 0.01;
  bool operator==(const SolverConfig&) const = default;
};

struct RelaxationConfig {
  double drag = 1e-4;
  double dt_initial = 0.1;
  double steady_tol = 1e-10;
  int step_budget = 5000;
  bool operator==(const RelaxationConfig&) const = default;
};

struct NormalizationConfig {
  /// Young's modulus of the reference-force experiment; null uses the fiber's own modulus.
  std::optional<double> reference_youngs_modulus;
  model::SupportType supports = model::SupportType::PinRoller;
  bool operator==(const NormalizationConfig&) const = default;
};

struct OutputConfig {
  std::string curve_csv = "curve.csv";
  int snapshots_every_n = 10;
  std::string vtk_dir = "vtk";
  std::string summary = "summary.json";
  std::string gap_csv = "gaps.csv";
  bool operator==(const OutputConfig&) const = default;
};

/// Named JSON merge patch applied on top of the base scenario.
struct Variant {
  std::string name;
  Json overrides = Json::object();
  bool operator==(const Variant&) const = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  FiberConfig fiber;
  GeometryConfig geometry;
  InteractionConfig interaction;
  ContactConfig contact;
  SweepConfig sweep;
  SweepConfig separated_sweep{6.0, 3.0, 0.025, 1e-6, 0.05, 1.5, std::nullopt};
  UnstableConfig unstable;
  SolverConfig solver;
  RelaxationConfig relaxation;
  NormalizationConfig normalization;
  OutputConfig outputs;
  std::vector<Variant> variants;
  bool operator==(const ScenarioConfig&) const = default;
};

Json to_json(const ScenarioConfig& config);
/// Strict conversion: unknown keys, missing keys and wrong types raise ValidationError with the field path.
ScenarioConfig from_json(const Json& json);

/// Canonical text form (sorted keys, fixed indentation, shortest round-trip numbers).
std::string serialize(const ScenarioConfig& config);
ScenarioConfig parse(const std::string& text);
ScenarioConfig load(const std::string& path);
void save(const ScenarioConfig& config, const std::string& path);

/// Throws ValidationError with a field path.
void validate(const ScenarioConfig& config);

/// Base config with the variant patch merged in; the result carries no variants.
ScenarioConfig apply_variant(const ScenarioConfig& config, const Variant& variant);
/// The config itself if it has no variants, otherwise one config per variant.
std::vector<ScenarioConfig> expand_variants(const ScenarioConfig& config);

// Derived objects.
model::TwoFiberSpec two_fiber_spec(const ScenarioConfig& config);
model::FiberMesh reference_fiber(const ScenarioConfig& config);
std::optional<interaction::InteractionLaw> interaction_law(const ScenarioConfig& config);
contact::ContactLaw contact_law(const ScenarioConfig& config);
solver::NewtonSettings newton_settings(const ScenarioConfig& config);
solver::ContinuationSettings continuation_settings(const SweepConfig& sweep);
solver::RelaxationSettings relaxation_settings(const ScenarioConfig& config);
/// Gap below which a state counts as "in contact".
double contact_gap_threshold(const ScenarioConfig& config);

std::string to_string(InteractionType type);
std::string to_string(model::SupportType supports);

}  // namespace fiberpeel::config
