#include "fiberpeel/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Geometry>

#include "fiberpeel/beam.hpp"
#include "fiberpeel/contact.hpp"
#include "fiberpeel/errors.hpp"
#include "fiberpeel/interaction.hpp"
#include "fiberpeel/kernels.hpp"
#include "fiberpeel/scenario.hpp"
#include "fiberpeel/solver.hpp"

namespace fiberpeel::verification {
namespace {

Check make_check(std::string name, double value, double threshold, bool below = true, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.value = value;
  c.threshold = threshold;
  c.passed = below ? value < threshold : value >= threshold;
  c.detail = std::move(detail);
  return c;
}

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// Same DOF layout and constraints, only the fiber-fiber providers.
model::Model coupling_model(const model::Model& full) {
  model::Model m(full.fibers());
  m.dofs() = full.dofs();
  for (const auto& p : full.providers())
    if (p->name() != "beam") m.add_provider(p);
  return m;
}

struct PerturbedStates {
  model::Model model;
  std::vector<Vector> states;
  double length_scale = 0.0;  // smallest physical length the interaction resolves
};

PerturbedStates perturbed_states(const config::ScenarioConfig& c, int count, std::mt19937& rng) {
  auto sys = scenario::build_system(c);
  PerturbedStates out{sys.model, {}, c.fiber.radius};
  model::SystemState base = sys.state;
  double dx = 0.1 * c.fiber.radius;
  double dt = 1e-2;
  if (c.interaction.type == config::InteractionType::LennardJones) {
    const auto law = std::get<interaction::LennardJones>(*config::interaction_law(c));
    const double g_eq = interaction::lj_equilibrium_gap(law);
    base = scenario::shifted_state(sys.model, g_eq);
    dx = 0.2 * g_eq;
    dt = 1e-3;
    out.length_scale = g_eq;
  }
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < count; ++k) {
    Vector q = base.q;
    for (std::size_t d : sys.model.dofs().free_dofs()) {
      const int comp = static_cast<int>(d % model::kDofsPerNode);
      q[d] += comp == 0 ? dx * u(rng) : comp == 1 ? 0.1 * dx * u(rng) : dt * u(rng);
    }
    out.states.push_back(q);
  }
  return out;
}

Vec8 rigid_motion(const Vec8& q, double angle, const Vec2& shift) {
  const Eigen::Rotation2Dd rot(angle);
  Vec8 out;
  out.segment<2>(0) = rot * q.segment<2>(0) + shift;
  out.segment<2>(2) = rot * q.segment<2>(2);
  out.segment<2>(4) = rot * q.segment<2>(4) + shift;
  out.segment<2>(6) = rot * q.segment<2>(6);
  return out;
}

Vector rigid_motion(const Vector& q, double angle, const Vec2& shift) {
  Vector out(q.size());
  for (Eigen::Index i = 0; i < q.size(); i += 4) {
    const Eigen::Rotation2Dd rot(angle);
    out.segment<2>(i) = rot * q.segment<2>(i) + shift;
    out.segment<2>(i + 2) = rot * q.segment<2>(i + 2);
  }
  return out;
}

std::vector<Check> beam_checks(const config::ScenarioConfig& c, std::mt19937& rng) {
  const auto mesh = model::make_straight_fiber(Vec2(0, 0), Vec2(0, 1), c.fiber.length, c.fiber.radius,
                                               c.fiber.youngs_modulus, c.fiber.poisson_ratio, c.fiber.n_elements);
  const auto element = mesh.element();
  const double le = element.ref_length;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double tangent_err = 0.0;
  double invariance = 0.0;
  for (int k = 0; k < 10; ++k) {
    Vec8 q;
    q << 0.05 * le * u(rng), 0.05 * le * u(rng), 0.2 * u(rng), 1.0 + 0.1 * u(rng), 0.05 * le * u(rng),
        le * (1.0 + 0.05 * u(rng)), 0.2 * u(rng), 1.0 + 0.1 * u(rng);
    tangent_err = std::max(tangent_err, beam::verify_tangent(element, q, 1e-7 * le));
    const double e0 = beam::element_energy_force_tangent(element, q).energy;
    const double e1 =
        beam::element_energy_force_tangent(element, rigid_motion(q, 6.0 * u(rng), Vec2(u(rng), u(rng)))).energy;
    invariance = std::max(invariance, rel(e0, e1));
  }
  return {make_check("beam tangent vs finite differences", tangent_err, 1e-6),
          make_check("beam energy rigid-body invariance", invariance, 1e-10)};
}

std::vector<Check> coupling_checks(const config::ScenarioConfig& c, std::mt19937& rng) {
  std::vector<Check> out;
  if (c.interaction.type == config::InteractionType::None && !c.contact.enabled) return out;
  auto ps = perturbed_states(c, 10, rng);
  const model::Model coupling = coupling_model(ps.model);
  const auto& free = ps.model.dofs().free_dofs();
  std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
  double tangent_err = 0.0;
  double coupling_err = 0.0;
  double balance = 0.0;
  double invariance = 0.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const Vector& q : ps.states) {
    std::vector<std::size_t> cols;
    for (int k = 0; k < 12; ++k) cols.push_back(pick(rng));
    tangent_err = std::max(tangent_err, assembled_tangent_error(ps.model, q, 1e-5 * ps.length_scale, cols));
    coupling_err = std::max(coupling_err, assembled_tangent_error(coupling, q, 1e-5 * ps.length_scale, cols));
    balance = std::max(balance, force_balance_error(ps.model, q));
    const double e0 = coupling.assemble(q, false).energy;
    const double e1 = coupling.assemble(rigid_motion(q, 3.0 * u(rng), Vec2(u(rng), u(rng))), false).energy;
    invariance = std::max(invariance, rel(e0, e1));
  }
  out.push_back(make_check("assembled tangent vs finite differences", tangent_err, 1e-6));
  out.push_back(make_check("interaction/contact tangent vs finite differences", coupling_err, 1e-6));
  out.push_back(make_check("interaction/contact force balance", balance, 1e-10));
  out.push_back(make_check("interaction/contact energy rigid-body invariance", invariance, 1e-10));

  // Energy gradient of one element pair.
  if (const auto law = config::interaction_law(c)) {
    const auto element = ps.model.fiber(0).element();
    const Vector& q = ps.states.front();
    const Vec8 qa = ps.model.element_dofs(q, 0, c.fiber.n_elements / 2);
    const Vec8 qb = ps.model.element_dofs(q, 1, c.fiber.n_elements / 2);
    const interaction::SSIPQuadrature quad{c.interaction.quadrature.n_segments, c.interaction.quadrature.n_gp};
    const auto base = interaction::integrate_pair(element, element, qa, qb, *law, quad);
    const double h = 1e-7 * ps.length_scale;
    double err = 0.0;
    for (int j = 0; j < 16; ++j) {
      Vec8 pa = qa, pb = qb, ma = qa, mb = qb;
      (j < 8 ? pa[j] : pb[j - 8]) += h;
      (j < 8 ? ma[j] : mb[j - 8]) -= h;
      const double fd = (interaction::integrate_pair(element, element, pa, pb, *law, quad).energy -
                         interaction::integrate_pair(element, element, ma, mb, *law, quad).energy) /
                        (2.0 * h);
      err = std::max(err, std::abs(fd - base.force[j]));
    }
    out.push_back(make_check("pair forces vs finite differences of the pair energy",
                             err / base.force.cwiseAbs().maxCoeff(), 1e-6));
    const double third = (base.force.segment<8>(0) + base.force.segment<8>(8)).cwiseAbs().maxCoeff();
    Vec2 sum = Vec2::Zero();
    for (int k : {0, 4, 8, 12}) sum += base.force.segment<2>(k);
    out.push_back(make_check("pair forces sum to zero", sum.cwiseAbs().maxCoeff() / base.force.cwiseAbs().maxCoeff(),
                             1e-12, true, "max |f_A + f_B| entry " + std::to_string(third)));
  }
  return out;
}

std::vector<Check> law_checks(const config::ScenarioConfig& c) {
  std::vector<Check> out;
  const contact::ContactLaw penalty = config::contact_law(c);
  const double gb = penalty.gbar;
  const double tiny = 1e-12 * gb;
  const auto p = [&](double g) { return contact::penalty_pressure(g, penalty); };
  double knot = std::abs(p(gb - tiny).pressure) + std::abs(p(gb - tiny).slope) / penalty.penalty;
  knot = std::max(knot, std::abs(p(tiny).pressure - p(-tiny).pressure) / (penalty.penalty * gb));
  knot = std::max(knot, std::abs(p(tiny).slope - p(-tiny).slope) / penalty.penalty);
  out.push_back(make_check("penalty law continuity at both knots", knot, 1e-9));

  interaction::LennardJones lj;
  lj.radius1 = lj.radius2 = c.fiber.radius;
  const double g_eq = interaction::lj_equilibrium_gap(lj);
  interaction::Electrostatic el{1.0, -1.0, 0.1, c.fiber.radius, c.fiber.radius};
  double fd_err = 0.0;
  for (double s : {0.5, 1.0, 2.0, 5.0}) {
    const double g = s * g_eq;
    const double h = 1e-6 * g;
    const auto v = interaction::lj_potential(g, lj);
    const auto vp = interaction::lj_potential(g + h, lj);
    const auto vm = interaction::lj_potential(g - h, lj);
    fd_err = std::max(fd_err, std::abs((vp.value - vm.value) / (2 * h) - v.d1) / std::abs(v.d1));
    fd_err = std::max(fd_err, std::abs((vp.d1 - vm.d1) / (2 * h) - v.d2) / std::abs(v.d2));
    const double d = 2.0 * c.fiber.radius + 10.0 * g;
    const auto e = interaction::ssip_elstat(d, el);
    const auto ep = interaction::ssip_elstat(d + h, el);
    const auto em = interaction::ssip_elstat(d - h, el);
    fd_err = std::max(fd_err, std::abs((ep.value - em.value) / (2 * h) - e.d1) / std::abs(e.d1));
    fd_err = std::max(fd_err, std::abs((ep.d1 - em.d1) / (2 * h) - e.d2) / std::abs(e.d2));
  }
  out.push_back(make_check("SSIP law derivatives vs finite differences", fd_err, 1e-7));

  interaction::LennardJones reg = lj;
  reg.g_reg = 0.6 * g_eq;
  const auto raw_params = interaction::make_kernel_law(lj);
  const auto reg_params = interaction::make_kernel_law(reg);
  double diff = 0.0;
  for (int k = 0; k <= 50; ++k) {
    const double g = *reg.g_reg * (1.0 + 0.1 * k);
    const auto a = kernels::evaluate_law(raw_params, g + raw_params.radius_sum);
    const auto b = kernels::evaluate_law(reg_params, g + reg_params.radius_sum);
    diff = std::max({diff, rel(a.value, b.value), rel(a.d1, b.d1), rel(a.d2, b.d2)});
    diff = std::max(diff, rel(interaction::lj_potential(g, lj).d1, interaction::lj_potential(g, reg).d1));
  }
  out.push_back(make_check("regularized LJ equals raw LJ above g_reg", diff, 1e-15));
  return out;
}

config::ScenarioConfig lj_reference_config(const config::ScenarioConfig& c) {
  if (c.interaction.type == config::InteractionType::LennardJones) return c;
  return scenario::preset("lj-baseline-64");
}

Check schedule_check(const config::ScenarioConfig& c, std::mt19937& rng) {
  config::ScenarioConfig lc = lj_reference_config(c);
  if (!lc.interaction.cutoff_radius) lc.interaction.cutoff_radius = 5.0 * lc.fiber.radius;
  lc.variants.clear();
  auto ps = perturbed_states(lc, 2, rng);
  const auto law = *config::interaction_law(lc);
  const interaction::SSIPQuadrature quad{lc.interaction.quadrature.n_segments, lc.interaction.quadrature.n_gp};
  double err = 0.0;
  std::size_t kept = 0;
  for (const Vector& q : ps.states) {
    Vector with = Vector::Zero(q.size()), without = Vector::Zero(q.size());
    interaction::InteractionProvider(0, 1, law, quad, true).add_to(ps.model, q, with, nullptr);
    interaction::InteractionProvider(0, 1, law, quad, false).add_to(ps.model, q, without, nullptr);
    err = std::max(err, (with - without).cwiseAbs().maxCoeff() / without.cwiseAbs().maxCoeff());
    kept = interaction::interaction_pair_schedule(ps.model, q, 0, 1, law).size();
  }
  const std::size_t all = static_cast<std::size_t>(lc.fiber.n_elements) * lc.fiber.n_elements;
  return make_check("cutoff schedule equals all-pairs integration", err, 1e-10, true,
                    std::to_string(kept) + " of " + std::to_string(all) + " element pairs kept");
}

std::vector<Check> quadrature_checks(const config::ScenarioConfig& c) {
  std::vector<Check> out;
  const double r = c.fiber.radius;
  {
    // Electrostatic: parallel touching elements at the baseline 16-element length.
    const beam::HermiteElement el{c.fiber.length / 16, 1.0, 1.0};
    Vec8 qa, qb;
    qa << 0, 0, 0, 1, 0, el.ref_length, 0, 1;
    qb << 2 * r, 0, 0, 1, 2 * r, el.ref_length, 0, 1;
    const interaction::InteractionLaw law = interaction::Electrostatic{1.0, -1.0, 0.1, r, r};
    std::vector<double> pi;
    for (int s : {2, 4, 8}) pi.push_back(interaction::integrate_pair(el, el, qa, qb, law, {s, 10}).energy);
    const double d1 = rel(pi[0], pi[1]);
    const double d2 = rel(pi[1], pi[2]);
    out.push_back(make_check("electrostatic pair energy: baseline rule vs doubled", d1, 1e-8, true,
                             "next refinement changes by " + std::to_string(d2)));
    out.push_back(make_check("electrostatic quadrature self-convergence", d2 <= d1 ? 0.0 : 1.0, 0.5));
  }
  {
    const beam::HermiteElement el{c.fiber.length / 64, 1.0, 1.0};
    interaction::LennardJones lj;
    lj.radius1 = lj.radius2 = r;
    const double g = interaction::lj_equilibrium_gap(lj);
    Vec8 qa, qb;
    qa << 0, 0, 0, 1, 0, el.ref_length, 0, 1;
    qb << 2 * r + g, 0, 0, 1, 2 * r + g, el.ref_length, 0, 1;
    std::vector<double> f;
    for (int s : {5, 10, 20}) f.push_back(interaction::integrate_pair(el, el, qa, qb, lj, {s, 10}).force.norm());
    const double d1 = rel(f[0], f[2]);
    out.push_back(make_check("LJ pair force: baseline rule vs 4x refined", d1, 1e-6));
    out.push_back(
        make_check("LJ quadrature self-convergence", rel(f[1], f[2]) <= rel(f[0], f[1]) ? 0.0 : 1.0, 0.5));
  }
  return out;
}

Check simd_check(std::mt19937& rng) {
  if (!kernels::avx2_supported()) return make_check("SIMD kernel equals scalar kernel", 0.0, 1e-12, true, "no AVX2");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    interaction::InteractionLaw law;
    if (trial % 2 == 0) {
      law = interaction::Electrostatic{};
    } else {
      interaction::LennardJones lj;
      if (trial >= 3) lj.g_reg = 0.5 * interaction::lj_equilibrium_gap(lj);
      if (trial == 5) lj.cutoff = 0.05;
      law = lj;
    }
    const auto params = interaction::make_kernel_law(law);
    const std::size_t m = 37;
    std::vector<double> x(m), y(m), w(m);
    std::array<std::vector<double>, 4> n;
    for (auto& v : n) v.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = 0.0405 + 0.02 * u(rng);
      y[j] = 0.1 * u(rng);
      w[j] = u(rng);
      for (auto& v : n) v[j] = u(rng);
    }
    kernels::ColumnData cols{x.data(), y.data(), w.data(), {n[0].data(), n[1].data(), n[2].data(), n[3].data()}, m};
    std::array<std::vector<double>, 2> fx, fy, hxx, hxy, hyy;
    kernels::RowResult rs[2];
    for (int k = 0; k < 2; ++k) {
      for (auto* v : {&fx[k], &fy[k], &hxx[k], &hxy[k], &hyy[k]}) v->assign(m, 0.0);
      const kernels::ColumnAccumulators acc{fx[k].data(), fy[k].data(), hxx[k].data(), hxy[k].data(), hyy[k].data()};
      (k == 0 ? kernels::row_scalar : kernels::row_avx2)(params, 0.0, 0.05, 0.7, cols, acc, rs[k]);
    }
    worst = std::max({worst, rel(rs[0].energy, rs[1].energy), rel(rs[0].fx, rs[1].fx), rel(rs[0].syy, rs[1].syy),
                      rel(rs[0].t[3][1], rs[1].t[3][1])});
    for (std::size_t j = 0; j < m; ++j) worst = std::max({worst, rel(fx[0][j], fx[1][j]), rel(hyy[0][j], hyy[1][j])});
  }
  return make_check("SIMD kernel equals scalar kernel", worst, 1e-12);
}

}  // namespace

double assembled_tangent_error(const model::Model& model, const Vector& q, double step,
                               const std::vector<std::size_t>& columns) {
  const auto& free = model.dofs().free_dofs();
  std::vector<std::size_t> cols = columns;
  if (cols.empty())
    for (std::size_t i = 0; i < free.size(); ++i) cols.push_back(i);
  const Matrix k = model.restrict_matrix(model.assemble(q, true).tangent);
  double err = 0.0;
  double scale = 0.0;
  for (std::size_t c : cols) {
    Vector qp = q, qm = q;
    qp[free[c]] += step;
    qm[free[c]] -= step;
    const Vector fd =
        (model.restrict_vector(model.assemble(qp, false).residual) - model.restrict_vector(model.assemble(qm, false).residual)) /
        (2.0 * step);
    err = std::max(err, (fd - k.col(static_cast<Eigen::Index>(c))).cwiseAbs().maxCoeff());
    scale = std::max(scale, k.col(static_cast<Eigen::Index>(c)).cwiseAbs().maxCoeff());
  }
  return scale > 0.0 ? err / scale : err;
}

double force_balance_error(const model::Model& model, const Vector& q) {
  const model::Model coupling = coupling_model(model);
  const Vector r = coupling.assemble(q, false).residual;
  Vec2 sum = Vec2::Zero();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < r.size(); i += model::kDofsPerNode) {
    sum += r.segment<2>(i);
    scale = std::max(scale, r.segment<2>(i).cwiseAbs().maxCoeff());
  }
  return scale > 0.0 ? sum.cwiseAbs().maxCoeff() / scale : 0.0;
}

RollUpResult roll_up_benchmark(const std::vector<int>& meshes) {
  RollUpResult out;
  const double length = 1.0;
  for (int n : meshes) {
    const auto mesh = model::make_straight_fiber(Vec2(0, 0), Vec2(0, 1), length, 0.01, 1e5, 0.3, n);
    model::Model m({mesh});
    for (auto comp : {model::Component::X, model::Component::Y, model::Component::TX, model::Component::TY})
      m.dofs().fix(m.dofs().index(0, 0, comp));
    m.add_provider(std::make_shared<model::BeamProvider>());
    const double ei = mesh.youngs_modulus * mesh.second_moment();
    const double moment = 2.0 * kPi * ei / length;
    auto end = std::make_shared<model::EndMoment>(0, n, 0.0);
    m.add_provider(end);
    model::SystemState s = m.reference_state();
    solver::NewtonSettings newton;
    newton.tol_residual = 1e-8 * ei / length;
    newton.tol_increment = 1e-10 * length;
    newton.du_max = length;
    newton.max_iterations = 100;
    const int steps = 64;
    for (int k = 1; k <= steps; ++k) {
      end->set_moment(moment * k / steps);
      solver::newton_step_controlled(m, s, newton);
    }
    out.n_elements.push_back(n);
    out.error.push_back(m.node_position(s.q, 0, n).norm() / length);
  }
  const std::size_t k = out.error.size();
  if (k >= 2)
    out.rate = std::log(out.error[k - 2] / out.error[k - 1]) /
               std::log(static_cast<double>(out.n_elements[k - 1]) / out.n_elements[k - 2]);
  return out;
}

std::vector<Check> run_property_suite(const config::ScenarioConfig& config, unsigned seed) {
  std::mt19937 rng(seed);
  const auto c = config::expand_variants(config).front();
  std::vector<Check> out;
  for (auto&& v : beam_checks(c, rng)) out.push_back(std::move(v));
  for (auto&& v : coupling_checks(c, rng)) out.push_back(std::move(v));
  for (auto&& v : law_checks(c)) out.push_back(std::move(v));
  out.push_back(schedule_check(c, rng));
  for (auto&& v : quadrature_checks(c)) out.push_back(std::move(v));
  out.push_back(simd_check(rng));
  const RollUpResult roll = roll_up_benchmark();
  std::ostringstream os;
  for (std::size_t i = 0; i < roll.error.size(); ++i) os << "n=" << roll.n_elements[i] << ": " << roll.error[i] << " ";
  out.push_back(make_check("beam roll-up convergence rate", roll.rate, 2.0, false, os.str()));
  return out;
}

}  // namespace fiberpeel::verification
