#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fiberpeel/model.hpp"
#include "fiberpeel/types.hpp"

namespace fiberpeel::solver {

struct NewtonSettings {
  double tol_residual = 1e-8;   // infinity norm over free DOFs
  double tol_increment = 1e-9;  // infinity norm of the last applied update
  int max_iterations = 50;
  double du_max = 0.01;  // cap on the largest nodal translational increment per iteration
  int max_backtracks = 30;
};

/// Default tolerances 1e-8 EA/l and 1e-10 l for a fiber.
NewtonSettings default_newton_settings(const model::FiberMesh& fiber, double du_max);

struct NewtonStats {
  int iterations = 0;
  double residual_norm = 0.0;
  int capped_iterations = 0;
  double max_applied_increment = 0.0;  // largest translational increment actually applied
};

/// Newton with displacement-increment control. On success `state.q` holds the converged
/// solution; on failure the state is left untouched and NonConvergence or SingularTangent is thrown.
NewtonStats newton_step_controlled(const model::Model& model, model::SystemState& state,
                                   const NewtonSettings& settings);

/// Largest translational entry of a full-length DOF vector.
double max_translational(const Vector& dq);

struct ContinuationSettings {
  double u_start = 0.0;
  double u_end = 1.0;
  double step_initial = 0.01;
  double step_min = 1e-6;
  double step_max = 0.01;
  int max_halvings = 30;
  /// Nominal step grows by this factor after an interval converged in at most `easy_iterations`.
  double growth = 1.5;
  int easy_iterations = 6;
  bool secant_predictor = false;
};

struct CurvePoint {
  int step = 0;
  double u_x = 0.0;
  double f_x = 0.0;
  int newton_iterations = 0;
  model::Branch branch = model::Branch::Contact;
};

struct ContinuationResult {
  std::vector<CurvePoint> points;
  bool terminated = false;  // branch ended before u_end
  std::string termination_reason;
  model::SystemState last_state;
};

/// Returns false to reject a converged state (e.g. the system jumped off the branch).
using BranchPredicate = std::function<bool(const model::SystemState&)>;
using StepCallback = std::function<void(const model::SystemState&, const CurvePoint&)>;

/// Displacement-controlled sweep from `start` (u_x is overwritten by u_start). The start point
/// itself is solved and recorded. Failing steps are bisected; a failure at the minimum step ends the branch.
ContinuationResult continuation_sweep(const model::Model& model, const model::SystemState& start,
                                      const ContinuationSettings& settings, const NewtonSettings& newton,
                                      const BranchPredicate& accept = {}, const StepCallback& on_step = {});

struct RelaxationSettings {
  double drag = 1e-4;
  double dt_initial = 0.1;
  double steady_tol = 1e-10;
  int step_budget = 5000;
};

struct RelaxationResult {
  model::SystemState state;
  int steps = 0;
  double time = 0.0;
  int newton_iterations = 0;
};

/// Overdamped flow C dq/dt = -residual(q) integrated with backward Euler until the velocity and
/// the static residual vanish, then polished with a static Newton solve. Throws MaxTimeExceeded.
RelaxationResult relax_to_steady_state(const model::Model& model, const model::SystemState& state,
                                       const RelaxationSettings& settings, const NewtonSettings& newton);

struct ReferenceForceResult {
  double force = 0.0;
  double deflection = 0.0;
  int secant_iterations = 0;
};

/// Midpoint point load that produces a transverse midpoint deflection of l/4 on one fiber
/// with the given supports.
ReferenceForceResult reference_force(const model::FiberMesh& fiber, model::SupportType supports,
                                     const NewtonSettings& newton);

}  // namespace fiberpeel::solver
