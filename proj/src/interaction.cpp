#include "fiberpeel/interaction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fiberpeel/errors.hpp"
#include "fiberpeel/hermite.hpp"
#include "fiberpeel/quadrature.hpp"
#include "bezier_box.hpp"

namespace fiberpeel::interaction {
namespace {

double geometric_radius(double r1, double r2) { return std::sqrt(2.0 * r1 * r2 / (r1 + r2)); }

double elstat_prefactor(const Electrostatic& law) {
  return 2.0 * kPi * law.radius1 * law.sigma1 * 2.0 * kPi * law.radius2 * law.sigma2 * law.k;
}

double vdw_prefactor(const LennardJones& law) {
  return 3.0 * kPi * kPi / 256.0 * law.rho1 * law.rho2 * geometric_radius(law.radius1, law.radius2) * law.k_vdw;
}

double replj_prefactor(const LennardJones& law) {
  return law.rho1 * law.rho2 * geometric_radius(law.radius1, law.radius2) * kRepulsivePrefactor * law.k_replj;
}

LawValue power_law(double c, double exponent, double x) {
  const double v = c * std::pow(x, -exponent);
  return {v, -exponent * v / x, exponent * (exponent + 1.0) * v / (x * x)};
}

LawValue raw_lj(double g, const LennardJones& law) {
  const LawValue a = ssip_vdw(g, law);
  const LawValue b = ssip_replj(g, law);
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}

/// Gauss point data of one element in structure-of-arrays form.
struct ElementPoints {
  std::vector<double> xi, x, y, w;
  std::array<std::vector<double>, 4> n;

  void fill(const beam::HermiteElement& element, const Vec8& q, const QuadratureRule& rule) {
    const std::size_t m = rule.size();
    xi = rule.points;
    x.resize(m);
    y.resize(m);
    w.resize(m);
    for (auto& v : n) v.resize(m);
    const double jac = 0.5 * element.ref_length;
    for (std::size_t i = 0; i < m; ++i) {
      const auto shape = hermite_values(rule.points[i], element.ref_length);
      const Vec2 r = combine(shape, q);
      x[i] = r.x();
      y[i] = r.y();
      w[i] = rule.weights[i] * jac;
      for (int k = 0; k < 4; ++k) n[k][i] = shape[k];
    }
  }
};

struct ColumnScratch {
  std::vector<double> fx, fy, hxx, hxy, hyy;
  void reset(std::size_t m) {
    for (auto* v : {&fx, &fy, &hxx, &hxy, &hyy}) v->assign(m, 0.0);
  }
};

[[noreturn]] void report_singularity(const kernels::LawParams& params, const ElementPoints& a, const ElementPoints& b,
                                     std::size_t i) {
  std::ostringstream os;
  os << "SSIP evaluation at xi_a=" << a.xi[i];
  for (std::size_t j = 0; j < b.x.size(); ++j) {
    const double d = std::hypot(a.x[i] - b.x[j], a.y[i] - b.y[j]);
    if (d * d > params.cutoff_sq) continue;
    const kernels::LawEval e = kernels::evaluate_law(params, d);
    if (!std::isfinite(e.value) || !std::isfinite(e.d1) || !std::isfinite(e.d2)) {
      os << ", xi_b=" << b.xi[j] << " (gap " << d - params.radius_sum << ")";
      break;
    }
  }
  throw NonFiniteError("interaction", os.str());
}

PairResult integrate_points(const kernels::LawParams& params, const ElementPoints& a, const ElementPoints& b,
                            ColumnScratch& scratch) {
  const std::size_t mb = b.x.size();
  scratch.reset(mb);
  kernels::ColumnData cols;
  cols.x = b.x.data();
  cols.y = b.y.data();
  cols.w = b.w.data();
  for (int k = 0; k < 4; ++k) cols.n[k] = b.n[k].data();
  cols.count = mb;
  const kernels::ColumnAccumulators acc{scratch.fx.data(), scratch.fy.data(), scratch.hxx.data(), scratch.hxy.data(),
                                        scratch.hyy.data()};

  PairResult out;
  kernels::RowResult row;
  for (std::size_t i = 0; i < a.x.size(); ++i) {
    kernels::accumulate_row(params, a.x[i], a.y[i], a.w[i], cols, acc, row);
    if (!std::isfinite(row.energy) || !std::isfinite(row.fx) || !std::isfinite(row.sxx) || !std::isfinite(row.syy))
      report_singularity(params, a, b, i);
    const double wa = a.w[i];
    out.energy += wa * row.energy;
    Mat2 s;
    s << row.sxx, row.sxy, row.sxy, row.syy;
    s *= wa;
    for (int k = 0; k < 4; ++k) {
      const double nk = a.n[k][i];
      out.force[2 * k] += nk * wa * row.fx;
      out.force[2 * k + 1] += nk * wa * row.fy;
      for (int l = 0; l < 4; ++l) out.tangent.block<2, 2>(2 * k, 2 * l) += (nk * a.n[l][i]) * s;
      for (int l = 0; l < 4; ++l) {
        const double c = -nk * wa;
        out.tangent(2 * k, 8 + 2 * l) += c * row.t[l][0];
        out.tangent(2 * k, 8 + 2 * l + 1) += c * row.t[l][1];
        out.tangent(2 * k + 1, 8 + 2 * l) += c * row.t[l][1];
        out.tangent(2 * k + 1, 8 + 2 * l + 1) += c * row.t[l][2];
      }
    }
  }
  for (std::size_t j = 0; j < mb; ++j) {
    Mat2 h;
    h << scratch.hxx[j], scratch.hxy[j], scratch.hxy[j], scratch.hyy[j];
    for (int k = 0; k < 4; ++k) {
      const double nk = b.n[k][j];
      out.force[8 + 2 * k] -= nk * scratch.fx[j];
      out.force[8 + 2 * k + 1] -= nk * scratch.fy[j];
      for (int l = 0; l < 4; ++l) out.tangent.block<2, 2>(8 + 2 * k, 8 + 2 * l) += (nk * b.n[l][j]) * h;
    }
  }
  out.tangent.block<8, 8>(8, 0) = out.tangent.block<8, 8>(0, 8).transpose();
  return out;
}

const QuadratureRule& cached_rule(const SSIPQuadrature& q) {
  thread_local SSIPQuadrature key{-1, -1};
  thread_local QuadratureRule rule;
  if (key.n_segments != q.n_segments || key.n_points != q.n_points) {
    rule = segmented_gauss_rule(q.n_segments, q.n_points);
    key = q;
  }
  return rule;
}

}  // namespace

LawValue ssip_elstat(double d, const Electrostatic& law) {
  if (!(d > 0.0)) throw GeometryError("electrostatic SSIP needs a positive centroid distance");
  return power_law(elstat_prefactor(law), 1.0, d);
}

LawValue ssip_vdw(double g, const LennardJones& law) {
  if (!(g > 0.0)) throw GeometryError("vdW SSIP is singular for gap <= 0");
  return power_law(vdw_prefactor(law), 2.5, g);
}

LawValue ssip_replj(double g, const LennardJones& law) {
  if (!(g > 0.0)) throw GeometryError("repulsive LJ SSIP is singular for gap <= 0");
  return power_law(replj_prefactor(law), 8.5, g);
}

LawValue lj_potential(double g, const LennardJones& law) {
  if (law.g_reg && g < *law.g_reg) {
    const LawValue knot = raw_lj(*law.g_reg, law);
    const double delta = g - *law.g_reg;
    return {knot.value + knot.d1 * delta + 0.5 * knot.d2 * delta * delta, knot.d1 + knot.d2 * delta, knot.d2};
  }
  return raw_lj(g, law);
}

double lj_section_force(double g, const LennardJones& law) {
  const double f = -lj_potential(g, law).d1;
  if (!std::isfinite(f)) throw NonFiniteError("lj_section_force", "unguarded singularity");
  return f;
}

double lj_point_equilibrium(const LennardJones& law) {
  if (!(law.k_vdw < 0.0) || !(law.k_replj > 0.0))
    throw ValidationError("LJ equilibrium needs k_vdw < 0 and k_replj > 0", "interaction");
  return std::pow(-2.0 * law.k_replj / law.k_vdw, 1.0 / 6.0);
}

double lj_equilibrium_gap(const LennardJones& law) { return kParallelEquilibriumFactor * lj_point_equilibrium(law); }

double hamaker_constant(const LennardJones& law) { return kPi * kPi * law.rho1 * law.rho2 * law.k_vdw; }

void validate(const InteractionLaw& law) {
  if (const auto* e = std::get_if<Electrostatic>(&law)) {
    if (!(e->radius1 > 0.0) || !(e->radius2 > 0.0)) throw ValidationError("radii must be positive", "interaction");
    if (!(e->k > 0.0)) throw ValidationError("Coulomb prefactor must be positive", "interaction.k");
    return;
  }
  const auto& lj = std::get<LennardJones>(law);
  if (!(lj.radius1 > 0.0) || !(lj.radius2 > 0.0)) throw ValidationError("radii must be positive", "interaction");
  if (!(lj.rho1 > 0.0) || !(lj.rho2 > 0.0)) throw ValidationError("densities must be positive", "interaction.rho");
  if (!(lj.k_vdw < 0.0)) throw ValidationError("k_vdw must be negative (attractive)", "interaction.k_vdw");
  if (!(lj.k_replj > 0.0)) throw ValidationError("k_replj must be positive", "interaction.k_replj");
  if (lj.cutoff && !(*lj.cutoff > 0.0)) throw ValidationError("cutoff must be positive", "interaction.cutoff_radius");
  if (lj.g_reg) {
    if (!(*lj.g_reg > 0.0)) throw ValidationError("g_reg must be positive", "interaction.g_reg");
    if (*lj.g_reg > lj_equilibrium_gap(lj) * (1.0 + 1e-12) && !lj.allow_reg_above_equilibrium)
      throw ValidationError("g_reg exceeds the parallel-fiber equilibrium gap; set allow_reg_above_equilibrium to force",
                            "interaction.g_reg");
  }
}

kernels::LawParams make_kernel_law(const InteractionLaw& law) {
  kernels::LawParams p;
  if (const auto* e = std::get_if<Electrostatic>(&law)) {
    p.kind = kernels::LawKind::Electrostatic;
    p.c_elstat = elstat_prefactor(*e);
    p.radius_sum = e->radius1 + e->radius2;
    return p;
  }
  const auto& lj = std::get<LennardJones>(law);
  p.kind = kernels::LawKind::LennardJones;
  p.c_vdw = vdw_prefactor(lj);
  p.c_rep = replj_prefactor(lj);
  p.radius_sum = lj.radius1 + lj.radius2;
  if (lj.cutoff) p.cutoff_sq = *lj.cutoff * *lj.cutoff;
  if (lj.g_reg) {
    // Knot values come from the kernel's own raw branch so both sides of g_reg agree bitwise.
    const kernels::LawEval knot = kernels::evaluate_law(p, *lj.g_reg + p.radius_sum);
    p.g_reg = *lj.g_reg;
    p.reg_value = knot.value;
    p.reg_d1 = knot.d1;
    p.reg_d2 = knot.d2;
  }
  return p;
}

PairResult integrate_pair(const beam::HermiteElement& element_a, const beam::HermiteElement& element_b,
                          const Vec8& qa, const Vec8& qb, const InteractionLaw& law, const SSIPQuadrature& quadrature) {
  const QuadratureRule& rule = cached_rule(quadrature);
  ElementPoints a, b;
  a.fill(element_a, qa, rule);
  b.fill(element_b, qb, rule);
  ColumnScratch scratch;
  return integrate_points(make_kernel_law(law), a, b, scratch);
}

std::vector<std::pair<int, int>> interaction_pair_schedule(const model::Model& model, const Vector& q, int fiber_a,
                                                           int fiber_b, const InteractionLaw& law) {
  const int na = model.fiber(fiber_a).n_elements;
  const int nb = model.fiber(fiber_b).n_elements;
  std::vector<std::pair<int, int>> pairs;
  const auto* lj = std::get_if<LennardJones>(&law);
  if (!lj || !lj->cutoff) {
    pairs.reserve(static_cast<std::size_t>(na) * nb);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) pairs.emplace_back(i, j);
    return pairs;
  }
  const auto ea = model.fiber(fiber_a).element();
  const auto eb = model.fiber(fiber_b).element();
  std::vector<detail::Box> boxes_a, boxes_b;
  for (int i = 0; i < na; ++i) boxes_a.push_back(detail::control_box(ea.ref_length, model.element_dofs(q, fiber_a, i)));
  for (int j = 0; j < nb; ++j) boxes_b.push_back(detail::control_box(eb.ref_length, model.element_dofs(q, fiber_b, j)));
  const double margin = std::max(ea.ref_length, eb.ref_length);
  const double radii = lj->radius1 + lj->radius2;
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      if (detail::box_distance(boxes_a[i], boxes_b[j]) - radii <= *lj->cutoff + margin) pairs.emplace_back(i, j);
  return pairs;
}

InteractionProvider::InteractionProvider(int fiber_a, int fiber_b, InteractionLaw law, SSIPQuadrature quadrature,
                                         bool use_schedule)
    : fiber_a_(fiber_a), fiber_b_(fiber_b), law_(std::move(law)), quadrature_(quadrature), use_schedule_(use_schedule) {
  validate(law_);
}

double InteractionProvider::add_to(const model::Model& model, const Vector& q, Vector& residual, Matrix* tangent) const {
  const QuadratureRule& rule = cached_rule(quadrature_);
  const kernels::LawParams params = make_kernel_law(law_);
  const auto ea = model.fiber(fiber_a_).element();
  const auto eb = model.fiber(fiber_b_).element();
  const int na = model.fiber(fiber_a_).n_elements;
  const int nb = model.fiber(fiber_b_).n_elements;

  std::vector<ElementPoints> pa(na), pb(nb);
  for (int i = 0; i < na; ++i) pa[i].fill(ea, model.element_dofs(q, fiber_a_, i), rule);
  for (int j = 0; j < nb; ++j) pb[j].fill(eb, model.element_dofs(q, fiber_b_, j), rule);

  std::vector<std::pair<int, int>> pairs;
  if (use_schedule_) {
    pairs = interaction_pair_schedule(model, q, fiber_a_, fiber_b_, law_);
  } else {
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < nb; ++j) pairs.emplace_back(i, j);
  }

  ColumnScratch scratch;
  double energy = 0.0;
  for (const auto& [i, j] : pairs) {
    const PairResult r = integrate_points(params, pa[i], pb[j], scratch);
    energy += r.energy;
    std::array<std::size_t, 16> dofs{};
    const auto da = model.dofs().element_dofs(fiber_a_, i);
    const auto db = model.dofs().element_dofs(fiber_b_, j);
    std::copy(da.begin(), da.end(), dofs.begin());
    std::copy(db.begin(), db.end(), dofs.begin() + 8);
    for (int r1 = 0; r1 < 16; ++r1) {
      residual[dofs[r1]] += r.force[r1];
      if (tangent)
        for (int c = 0; c < 16; ++c) (*tangent)(dofs[r1], dofs[c]) += r.tangent(r1, c);
    }
  }
  return energy;
}

}  // namespace fiberpeel::interaction
