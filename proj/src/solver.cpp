#include "fiberpeel/solver.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "fiberpeel/errors.hpp"

namespace fiberpeel::solver {
namespace {

constexpr Eigen::Index kDenseLimit = 300;

Vector solve_linear(const Matrix& k, const Vector& rhs) {
  Vector x;
  if (k.rows() <= kDenseLimit) {
    const Eigen::PartialPivLU<Matrix> lu(k);
    x = lu.solve(rhs);
  } else {
    const Eigen::SparseMatrix<double> s = k.sparseView();
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(s);
    lu.factorize(s);
    if (lu.info() != Eigen::Success) throw SingularTangent("sparse LU factorization failed");
    x = lu.solve(rhs);
  }
  if (!x.allFinite()) throw SingularTangent("linear solve produced non-finite values");
  const double scale = rhs.lpNorm<Eigen::Infinity>();
  if ((k * x - rhs).lpNorm<Eigen::Infinity>() > 1e-6 * scale + 1e-300)
    throw SingularTangent("tangent is numerically singular");
  return x;
}

// Backward-Euler drag term C (q - q_prev) / dt added to the static residual.
struct Damping {
  Vector c_over_dt;
  Vector q_prev;
};

struct Evaluation {
  model::Assembly assembly;
  Vector residual;  // free DOFs
};

Evaluation evaluate(const model::Model& model, const Vector& q, const Damping* damping) {
  Evaluation e{model.assemble(q, true), {}};
  if (damping) {
    e.assembly.residual += damping->c_over_dt.cwiseProduct(q - damping->q_prev);
    e.assembly.tangent.diagonal() += damping->c_over_dt;
  }
  e.residual = model.restrict_vector(e.assembly.residual);
  return e;
}

NewtonStats newton_impl(const model::Model& model, Vector& q_io, const NewtonSettings& settings,
                        const Damping* damping) {
  Vector q = q_io;
  const auto& free = model.dofs().free_dofs();
  NewtonStats stats;
  Evaluation ev = evaluate(model, q, damping);
  double last_increment = std::numeric_limits<double>::infinity();
  for (;;) {
    stats.residual_norm = ev.residual.size() ? ev.residual.lpNorm<Eigen::Infinity>() : 0.0;
    if (stats.iterations >= 1 && stats.residual_norm < settings.tol_residual &&
        last_increment < settings.tol_increment)
      break;
    if (stats.iterations >= settings.max_iterations)
      throw NonConvergence("Newton did not converge within " + std::to_string(settings.max_iterations) +
                               " iterations",
                           stats.residual_norm);
    if (free.empty()) {
      ++stats.iterations;
      last_increment = 0.0;
      continue;
    }
    const Vector dx = solve_linear(model.restrict_matrix(ev.assembly.tangent), -ev.residual);
    Vector dq = Vector::Zero(q.size());
    for (std::size_t i = 0; i < free.size(); ++i) dq[free[i]] = dx[i];
    const double largest = max_translational(dq);
    if (largest > settings.du_max) {
      dq *= settings.du_max / largest;
      ++stats.capped_iterations;
    }
    for (int b = 0;; ++b) {
      try {
        ev = evaluate(model, q + dq, damping);
        break;
      } catch (const NonFiniteError&) {
        if (b >= settings.max_backtracks) throw NonConvergence("backtracking exhausted", stats.residual_norm);
      } catch (const GeometryError&) {
        if (b >= settings.max_backtracks) throw NonConvergence("backtracking exhausted", stats.residual_norm);
      }
      dq *= 0.5;
    }
    q += dq;
    last_increment = dq.lpNorm<Eigen::Infinity>();
    stats.max_applied_increment = std::max(stats.max_applied_increment, max_translational(dq));
    ++stats.iterations;
  }
  q_io = q;
  return stats;
}

double sign(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace

NewtonSettings default_newton_settings(const model::FiberMesh& fiber, double du_max) {
  NewtonSettings s;
  s.tol_residual = 1e-8 * fiber.youngs_modulus * fiber.area() / fiber.length;
  s.tol_increment = 1e-10 * fiber.length;
  s.du_max = du_max;
  return s;
}

double max_translational(const Vector& dq) {
  double m = 0.0;
  for (Eigen::Index i = 0; i + 1 < dq.size(); i += model::kDofsPerNode)
    m = std::max(m, std::hypot(dq[i], dq[i + 1]));
  return m;
}

NewtonStats newton_step_controlled(const model::Model& model, model::SystemState& state,
                                   const NewtonSettings& settings) {
  model::SystemState trial = state;
  model.apply_prescribed(trial);
  const NewtonStats stats = newton_impl(model, trial.q, settings, nullptr);
  state = std::move(trial);
  return stats;
}

// ---------------------------------------------------------------------------

ContinuationResult continuation_sweep(const model::Model& model, const model::SystemState& start,
                                      const ContinuationSettings& settings, const NewtonSettings& newton,
                                      const BranchPredicate& accept, const StepCallback& on_step) {
  if (!(settings.step_min > 0.0)) throw ValidationError("step_min must be positive", "sweep.step_min");
  if (settings.u_start == settings.u_end) throw ValidationError("u_start equals u_end", "sweep.u_end");

  ContinuationResult result;
  model::SystemState current = start;
  current.u_x = settings.u_start;
  int step_index = 0;

  const auto record = [&](const model::SystemState& s, int iterations) {
    CurvePoint p;
    p.step = step_index++;
    p.u_x = s.u_x;
    p.f_x = model.extract_reactions(s).total_fx;
    p.newton_iterations = iterations;
    p.branch = s.branch;
    result.points.push_back(p);
    if (on_step) on_step(s, p);
  };

  try {
    const NewtonStats st = newton_step_controlled(model, current, newton);
    if (accept && !accept(current)) {
      result.terminated = true;
      result.termination_reason = "start state rejected by branch predicate";
      result.last_state = current;
      return result;
    }
    record(current, st.iterations);
  } catch (const Error& e) {
    result.terminated = true;
    result.termination_reason = std::string("start state failed: ") + e.what();
    result.last_state = start;
    return result;
  }

  const double dir = sign(settings.u_end - settings.u_start);
  double nominal = std::abs(settings.step_initial);
  std::optional<model::SystemState> previous;

  const auto attempt = [&](double u, model::SystemState& out, int& iterations) {
    const int variants = previous && settings.secant_predictor ? 2 : 1;
    for (int v = 0; v < variants; ++v) {
      model::SystemState trial = current;
      trial.u_x = u;
      if (v == 0 && variants == 2) {
        const double ratio = (u - current.u_x) / (current.u_x - previous->u_x);
        trial.q = current.q + ratio * (current.q - previous->q);
      }
      try {
        iterations = newton_step_controlled(model, trial, newton).iterations;
      } catch (const Error&) {
        continue;
      }
      if (accept && !accept(trial)) continue;
      out = std::move(trial);
      return true;
    }
    return false;
  };

  while (dir * (settings.u_end - current.u_x) > 0.0) {
    double target = current.u_x + dir * nominal;
    if (dir * (target - settings.u_end) > 0.0) target = settings.u_end;
    double sub = target - current.u_x;
    int halvings = 0;
    int worst = 0;
    while (current.u_x != target) {
      double u = current.u_x + sub;
      if (dir * (u - target) >= 0.0) u = target;
      model::SystemState next;
      int iterations = 0;
      if (attempt(u, next, iterations)) {
        previous = current;
        current = std::move(next);
        worst = std::max(worst, iterations);
        record(current, iterations);
        continue;
      }
      sub *= 0.5;
      ++halvings;
      if (std::abs(sub) < settings.step_min || halvings > settings.max_halvings) {
        result.terminated = true;
        result.termination_reason = "no convergence at minimum step beyond u_x = " + std::to_string(current.u_x);
        result.last_state = current;
        return result;
      }
    }
    if (halvings == 0 && worst <= settings.easy_iterations)
      nominal = std::min(nominal * settings.growth, std::abs(settings.step_max));
  }
  result.last_state = current;
  return result;
}

// ---------------------------------------------------------------------------

RelaxationResult relax_to_steady_state(const model::Model& model, const model::SystemState& state,
                                       const RelaxationSettings& settings, const NewtonSettings& newton) {
  if (!(settings.drag > 0.0)) throw ValidationError("drag must be positive", "relaxation.drag");
  if (!(settings.dt_initial > 0.0)) throw ValidationError("dt_initial must be positive", "relaxation.dt_initial");

  const auto n = static_cast<Eigen::Index>(model.dofs().size());
  Vector c = Vector::Zero(n);
  for (int f = 0; f < model.dofs().n_fibers(); ++f) {
    const auto& mesh = model.fiber(f);
    const double le = mesh.element_length();
    for (int node = 0; node < mesh.n_nodes(); ++node) {
      const double trib = (node == 0 || node == mesh.n_elements) ? 0.5 * le : le;
      const std::size_t ix = model.dofs().index(f, node, model::Component::X);
      c[ix] = c[ix + 1] = settings.drag * trib;
      c[ix + 2] = c[ix + 3] = settings.drag * trib * mesh.radius * mesh.radius;
    }
  }

  RelaxationResult out;
  out.state = state;
  model.apply_prescribed(out.state);
  double dt = settings.dt_initial;
  const auto& free = model.dofs().free_dofs();
  while (out.steps < settings.step_budget) {
    ++out.steps;
    Damping damping{c / dt, out.state.q};
    Vector q = out.state.q;
    NewtonStats st;
    try {
      st = newton_impl(model, q, newton, &damping);
    } catch (const Error&) {
      dt *= 0.5;
      if (dt < 1e-14 * settings.dt_initial) break;
      continue;
    }
    out.newton_iterations += st.iterations;
    out.time += dt;
    double velocity = 0.0;
    for (std::size_t d : free) velocity = std::max(velocity, std::abs(q[d] - out.state.q[d]) / dt);
    out.state.q = q;
    const Vector r = model.restrict_vector(model.assemble(q, false).residual);
    const double static_residual = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
    if (velocity < settings.steady_tol && static_residual < newton.tol_residual) {
      out.newton_iterations += newton_step_controlled(model, out.state, newton).iterations;
      return out;
    }
    if (st.iterations <= 5) dt *= 2.0;
  }
  throw MaxTimeExceeded("relaxation did not reach a steady state within " + std::to_string(settings.step_budget) +
                        " steps");
}

// ---------------------------------------------------------------------------

ReferenceForceResult reference_force(const model::FiberMesh& fiber, model::SupportType supports,
                                     const NewtonSettings& newton) {
  if (fiber.n_elements % 2 != 0)
    throw ValidationError("reference force needs an even number of elements (midpoint node)", "fiber.n_elements");
  auto sys = model::build_single_fiber_model(fiber, supports);
  const std::size_t dof = sys.model.dofs().index(0, fiber.n_elements / 2, model::Component::X);
  auto load = std::make_shared<model::PointLoad>(dof, 0.0);
  sys.model.add_provider(load);

  const double target = 0.25 * fiber.length;
  const double ei = fiber.youngs_modulus * fiber.second_moment();
  const double f_lin = 48.0 * ei * target / (fiber.length * fiber.length * fiber.length);
  const double ref = sys.model.reference()[dof];

  double loaded = 0.0;
  model::SystemState state = sys.state;
  const auto deflection = [&](double force) {
    double f = loaded;
    double step = 0.05 * f_lin;
    while (f != force) {
      double next = force > f ? std::min(force, f + step) : std::max(force, f - step);
      load->set_magnitude(next);
      model::SystemState trial = state;
      try {
        newton_step_controlled(sys.model, trial, newton);
      } catch (const Error&) {
        step *= 0.5;
        if (step < 1e-8 * f_lin) throw Error("reference force load stepping failed");
        continue;
      }
      state = std::move(trial);
      f = next;
    }
    loaded = force;
    return state.q[dof] - ref;
  };

  ReferenceForceResult out;
  double f0 = f_lin;
  double r0 = deflection(f0) - target;
  double f1 = 1.2 * f_lin;
  double r1 = deflection(f1) - target;
  for (int it = 0; it < 60; ++it) {
    out.secant_iterations = it + 1;
    if (std::abs(r1) < 1e-8 * fiber.length) {
      out.force = f1;
      out.deflection = r1 + target;
      return out;
    }
    if (r1 == r0) break;
    double f2 = f1 - r1 * (f1 - f0) / (r1 - r0);
    if (!(f2 > 0.0) || !std::isfinite(f2)) break;
    f2 = std::clamp(f2, 0.5 * f1, 2.0 * f1);
    f0 = f1;
    r0 = r1;
    f1 = f2;
    r1 = deflection(f1) - target;
  }
  throw Error("reference force root-find failed to bracket the l/4 deflection");
}

}  // namespace fiberpeel::solver
