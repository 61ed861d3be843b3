#include "fiberpeel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "fiberpeel/contact.hpp"
#include "fiberpeel/errors.hpp"
#include "fiberpeel/interaction.hpp"

namespace fiberpeel::scenario {
namespace {

using config::Json;
using config::ScenarioConfig;

ScenarioConfig elstat_baseline() {
  ScenarioConfig c;
  c.name = "elstat-baseline-16";
  c.fiber = {5.0, 0.02, 1e5, 0.3, 16};
  c.geometry.separation = 0.04;
  c.interaction.type = config::InteractionType::Electrostatic;
  c.interaction.quadrature = {2, 10};
  c.contact = {true, 100.0, 0.002, {20, 5}};
  c.sweep = {0.0, 4.75, 0.0025, 1e-5, 0.025, 1.5, std::nullopt};
  c.separated_sweep = {6.0, 2.5, 0.025, 1e-5, 0.05, 1.5, std::nullopt};
  c.unstable.u_values = {3.5, 3.75, 4.0};
  c.solver.du_max = 0.01;
  c.solver.max_iter = 50;
  return c;
}

ScenarioConfig lj_baseline() {
  ScenarioConfig c;
  c.name = "lj-baseline-64";
  c.fiber = {5.0, 0.02, 1e5, 0.3, 64};
  c.geometry.separation = 0.04;
  auto& i = c.interaction;
  i.type = config::InteractionType::LennardJones;
  i.rho1 = i.rho2 = 1.0;
  i.k_vdw = -1e-7;
  i.k_replj = 5e-25;
  i.cutoff_radius = 0.1;
  i.quadrature = {5, 10};
  c.contact = {false, 100.0, 0.002, {5, 10}};
  c.sweep = {8e-4, 4.5, 0.0025, 1e-6, 0.0025, 1.0, std::nullopt};
  c.separated_sweep = {6.0, 3.0, 0.025, 1e-5, 0.05, 1.5, std::nullopt};
  c.solver.du_max = 0.001;
  c.solver.max_iter = 200;
  c.outputs.snapshots_every_n = 100;
  return c;
}

Json fiber_patch(const char* key, const Json& value) { return {{"fiber", {{key, value}}}}; }

std::string ratio_name(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "greg-%.1f", r);
  return buf;
}

struct CacheKey {
  double length, radius, e;
  int n;
  int supports;
  double du_max;
  auto operator<=>(const CacheKey&) const = default;
};

double cached_reference_force(const model::FiberMesh& fiber, model::SupportType supports,
                              const solver::NewtonSettings& base) {
  static std::mutex mutex;
  static std::map<CacheKey, double> cache;
  solver::NewtonSettings newton = base;
  newton.du_max = std::max(base.du_max, 0.01 * fiber.length);
  newton.tol_residual = 1e-8 * fiber.youngs_modulus * fiber.area() / fiber.length;
  newton.max_iterations = std::max(base.max_iterations, 50);
  const CacheKey key{fiber.length, fiber.radius, fiber.youngs_modulus, fiber.n_elements,
                     static_cast<int>(supports), newton.du_max};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double f = solver::reference_force(fiber, supports, newton).force;
  std::lock_guard lock(mutex);
  cache[key] = f;
  return f;
}

std::string snapshot_name(const char* prefix, int step) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%05d.vtk", prefix, step);
  return buf;
}

void write_artifacts(const ScenarioConfig& c, const model::Model& model, const RunResult& r,
                     const std::vector<Vector>& states, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  config::save(c, (dir / "config.json").string());
  output::write_curve_csv(r.records, (dir / c.outputs.curve_csv).string());
  output::write_summary(r.summary, (dir / c.outputs.summary).string());
  if (r.records.empty()) return;

  std::set<std::size_t> snaps;
  if (c.outputs.snapshots_every_n > 0)
    for (std::size_t k = 0; k < r.records.size(); k += c.outputs.snapshots_every_n) snaps.insert(k);
  std::size_t imax = 0, imin = 0;
  for (std::size_t k = 0; k < r.records.size(); ++k) {
    if (r.records[k].f_x > r.records[imax].f_x) imax = k;
    if (r.records[k].f_x < r.records[imin].f_x) imin = k;
  }
  snaps.insert(imax);
  snaps.insert(imin);
  snaps.insert(r.records.size() - 1);

  const auto vtk_dir = dir / c.outputs.vtk_dir;
  std::filesystem::create_directories(vtk_dir);
  std::ofstream gaps(dir / c.outputs.gap_csv);
  if (!gaps) throw Error("cannot write " + (dir / c.outputs.gap_csv).string());
  gaps << "step,u_x,slave_s,gap,gap_over_R,mid_x,mid_y\n";
  const double radius = c.fiber.radius;
  const double threshold = config::contact_gap_threshold(c);
  const contact::ContactQuadrature quad{c.contact.quadrature.n_segments, c.contact.quadrature.n_gp};
  for (std::size_t k : snaps) {
    const Vector& q = states[k];
    const int step = r.records[k].step;
    output::write_vtk_centerlines(model, q, (vtk_dir / snapshot_name("fibers", step)).string());
    std::vector<contact::GapSample> active;
    for (const auto& s : contact::gap_field(model, q, 0, 1, quad))
      if (s.gap < threshold) active.push_back(s);
    output::write_vtk_gaps(active, radius, (vtk_dir / snapshot_name("gaps", step)).string());
    for (const auto& s : active)
      gaps << step << ',' << output::format_number(r.records[k].u_x) << ',' << output::format_number(s.slave_s)
           << ',' << output::format_number(s.gap) << ',' << output::format_number(s.gap / radius) << ','
           << output::format_number(s.midpoint.x()) << ',' << output::format_number(s.midpoint.y()) << '\n';
  }
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"elstat-baseline-16", "elstat-paramstudy-32", "elstat-meshstudy", "lj-baseline-64", "lj-regularization"};
}

ScenarioConfig preset(const std::string& name) {
  if (name == "elstat-baseline-16") return elstat_baseline();
  if (name == "elstat-paramstudy-32") {
    ScenarioConfig c = elstat_baseline();
    c.name = name;
    c.fiber.n_elements = 32;
    c.sweep.u_end = 5.0;
    c.normalization.reference_youngs_modulus = 1e5;
    for (double e : {1e4, 1e5, 1e6}) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "E%.0e", e);
      c.variants.push_back({buf, fiber_patch("youngs_modulus", e)});
    }
    return c;
  }
  if (name == "elstat-meshstudy") {
    ScenarioConfig c = elstat_baseline();
    c.name = name;
    c.normalization.reference_youngs_modulus = 1e5;
    for (int n : {8, 16, 32}) c.variants.push_back({"n" + std::to_string(n), fiber_patch("n_elements", n)});
    Json doubled = fiber_patch("n_elements", 8);
    doubled["interaction"] = {{"quadrature", {{"n_segments", 2}, {"n_gp", 20}}}};
    doubled["contact"] = {{"quadrature", {{"n_segments", 20}, {"n_gp", 10}}}};
    c.variants.push_back({"n8-doubled-gp", doubled});
    return c;
  }
  if (name == "lj-baseline-64") return lj_baseline();
  if (name == "lj-regularization") {
    ScenarioConfig c = lj_baseline();
    c.name = name;
    c.sweep.u_end = 1.5;
    c.variants.push_back({"greg-none", Json::object()});
    for (double r : {0.3, 0.6, 1.0, 1.2}) {
      // The regularized law has no singularity left, so the looser electrostatic cap applies.
      Json patch{{"interaction", {{"g_reg_over_g_eq", r}}}, {"solver", {{"du_max", c.fiber.radius / 2}}}};
      if (r > 1.0) patch["interaction"]["allow_reg_above_equilibrium"] = true;
      c.variants.push_back({ratio_name(r), patch});
    }
    return c;
  }
  throw ValidationError("unknown preset '" + name + "'", "preset");
}

model::TwoFiberSystem build_system(const ScenarioConfig& c) {
  auto sys = model::build_two_fiber_model(config::two_fiber_spec(c));
  if (const auto law = config::interaction_law(c))
    sys.model.add_provider(std::make_shared<interaction::InteractionProvider>(
        0, 1, *law, interaction::SSIPQuadrature{c.interaction.quadrature.n_segments, c.interaction.quadrature.n_gp}));
  if (c.contact.enabled)
    sys.model.add_provider(std::make_shared<contact::ContactProvider>(
        0, 1, config::contact_law(c),
        contact::ContactQuadrature{c.contact.quadrature.n_segments, c.contact.quadrature.n_gp}));
  return sys;
}

double reference_force(const ScenarioConfig& c) {
  return cached_reference_force(config::reference_fiber(c), c.normalization.supports, config::newton_settings(c));
}

double own_reference_force(const ScenarioConfig& c) {
  ScenarioConfig own = c;
  own.normalization.reference_youngs_modulus.reset();
  return reference_force(own);
}

model::SystemState shifted_state(const model::Model& model, double u) {
  model::SystemState s = model.reference_state();
  s.u_x = u;
  for (int node = 0; node < model.fiber(1).n_nodes(); ++node) s.q[model.dofs().index(1, node, model::Component::X)] += u;
  model.apply_prescribed(s);
  return s;
}

RunResult run(const ScenarioConfig& c, model::Branch branch, const RunOptions& options) {
  if (!c.variants.empty()) throw ValidationError("config has variants; run them individually", "variants");
  config::validate(c);
  auto sys = build_system(c);
  const model::Model& model = sys.model;
  const solver::NewtonSettings newton = config::newton_settings(c);

  RunResult result;
  result.scenario = c.name;
  result.branch = branch;
  result.f_ref = reference_force(c);
  result.f_ref_own = own_reference_force(c);

  const double threshold = config::contact_gap_threshold(c);
  const contact::ContactQuadrature gap_quad{c.contact.quadrature.n_segments, c.contact.quadrature.n_gp};
  double last_gap = std::numeric_limits<double>::infinity();
  double last_gap_s = 0.0;
  const auto measure = [&](const model::SystemState& s) {
    last_gap = std::numeric_limits<double>::infinity();
    for (const auto& g : contact::gap_field(model, s.q, 0, 1, gap_quad))
      if (g.gap < last_gap) {
        last_gap = g.gap;
        last_gap_s = g.slave_s;
      }
  };

  std::vector<Vector> states;
  const auto record = [&](const model::SystemState& s, int iterations) {
    output::CurveRecord r;
    r.step = static_cast<int>(result.records.size());
    r.u_x = s.u_x;
    r.u_x_over_l = s.u_x / c.fiber.length;
    r.f_x = model.extract_reactions(s).total_fx;
    r.f_x_normalized = r.f_x / result.f_ref;
    r.newton_iters = iterations;
    r.branch = branch;
    result.records.push_back(r);
    result.min_gap.push_back(last_gap);
    result.min_gap_s.push_back(last_gap_s);
    states.push_back(s.q);
  };

  if (branch == model::Branch::Unstable) {
    const auto relax = config::relaxation_settings(c);
    for (double u : c.unstable.u_values) {
      try {
        auto r = solver::relax_to_steady_state(model, shifted_state(model, u), relax, newton);
        r.state.branch = branch;
        measure(r.state);
        record(r.state, r.newton_iterations);
      } catch (const Error& e) {
        result.terminated = true;
        result.termination_reason += "relaxation at u_x = " + std::to_string(u) + " failed: " + e.what() + "; ";
      }
    }
  } else {
    const bool contact_branch = branch == model::Branch::Contact;
    const auto& sweep = contact_branch ? c.sweep : c.separated_sweep;
    model::SystemState start = shifted_state(model, sweep.u_start);
    start.branch = branch;
    const auto accept = [&](const model::SystemState& s) {
      measure(s);
      return contact_branch ? last_gap < threshold : last_gap >= threshold;
    };
    const auto on_step = [&](const model::SystemState& s, const solver::CurvePoint& p) {
      record(s, p.newton_iterations);
    };
    const auto sweep_result = solver::continuation_sweep(model, start, config::continuation_settings(sweep), newton,
                                                         accept, on_step);
    result.terminated = sweep_result.terminated;
    result.termination_reason = sweep_result.termination_reason;
  }

  result.summary = output::summarize(result.records, result.f_ref);
  result.summary.scenario = c.name;
  result.summary.branch = model::to_string(branch);
  result.summary.f_ref_own = result.f_ref_own;
  result.summary.terminated = result.terminated;
  result.summary.termination_reason = result.termination_reason;
  if (!result.min_gap.empty())
    result.summary.min_gap_over_r = *std::min_element(result.min_gap.begin(), result.min_gap.end()) / c.fiber.radius;

  if (options.write_files) write_artifacts(c, model, result, states, options.out_dir);
  if (options.keep_states) result.states = std::move(states);
  return result;
}

std::vector<RunResult> run_all(const ScenarioConfig& c, model::Branch branch, const RunOptions& options) {
  config::validate(c);
  std::vector<RunResult> out;
  if (c.variants.empty()) {
    out.push_back(run(c, branch, options));
    return out;
  }
  // Variants run concurrently in batches of the available hardware threads.
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t begin = 0; begin < c.variants.size(); begin += width) {
    std::vector<std::future<RunResult>> batch;
    for (std::size_t i = begin; i < std::min(begin + width, c.variants.size()); ++i) {
      RunOptions sub = options;
      sub.out_dir = options.out_dir / c.variants[i].name;
      batch.push_back(std::async(std::launch::async, [cfg = config::apply_variant(c, c.variants[i]), branch, sub] {
        return run(cfg, branch, sub);
      }));
    }
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

}  // namespace fiberpeel::scenario
