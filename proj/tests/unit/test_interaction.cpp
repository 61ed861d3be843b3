#include <doctest.h>

#include <cmath>
#include <random>

#include "fiberpeel/errors.hpp"
#include "fiberpeel/interaction.hpp"
#include "fiberpeel/kernels.hpp"

using namespace fiberpeel;
using namespace fiberpeel::interaction;

TEST_CASE("electrostatic law values") {
  const Electrostatic law{1.0, -1.0, 0.1, 0.02, 0.02};
  CHECK(ssip_elstat(0.05, law).value == doctest::Approx(-0.0315827).epsilon(1e-6));
  CHECK(ssip_elstat(0.10, law).value == doctest::Approx(0.5 * ssip_elstat(0.05, law).value).epsilon(1e-15));
  Electrostatic same = law;
  same.sigma2 = 1.0;
  CHECK(ssip_elstat(0.05, same).value == doctest::Approx(-ssip_elstat(0.05, law).value).epsilon(1e-15));
  CHECK_THROWS_AS(ssip_elstat(0.0, law), GeometryError);
}

TEST_CASE("van der waals and repulsive laws") {
  LennardJones lj;
  CHECK(ssip_vdw(1e-3, lj).value == doctest::Approx(-5.1722e-2).epsilon(1e-4));
  CHECK(ssip_vdw(2e-3, lj).value / ssip_vdw(1e-3, lj).value == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-12));
  CHECK(ssip_replj(1e-3, lj).value == doctest::Approx(1.1851e-2).epsilon(1e-4));
  CHECK(ssip_replj(2e-3, lj).value / ssip_replj(1e-3, lj).value ==
        doctest::Approx(std::pow(2.0, -8.5)).epsilon(1e-12));
  LennardJones zero = lj;
  zero.k_vdw = 0.0;
  zero.k_replj = 0.0;
  CHECK(ssip_vdw(1e-3, zero).value == 0.0);
  CHECK(ssip_replj(1e-3, zero).value == 0.0);
  CHECK_THROWS_AS(ssip_vdw(-1e-4, lj), GeometryError);
}

TEST_CASE("equilibrium constants") {
  LennardJones lj;
  CHECK(lj_point_equilibrium(lj) == doctest::Approx(1.4678e-3).epsilon(5e-5));
  CHECK(lj_equilibrium_gap(lj) == doctest::Approx(8.3913e-4).epsilon(5e-5));
  LennardJones scaled = lj;
  scaled.k_replj *= 64.0;
  CHECK(lj_equilibrium_gap(scaled) == doctest::Approx(2.0 * lj_equilibrium_gap(lj)).epsilon(1e-14));
}

TEST_CASE("section force root differs from the parallel equilibrium gap") {
  LennardJones lj;
  const double g_eq = lj_equilibrium_gap(lj);
  CHECK(std::abs(lj_section_force(g_eq, lj)) > 0.0);
  double lo = 0.1 * g_eq, hi = 10.0 * g_eq;
  REQUIRE(lj_section_force(lo, lj) * lj_section_force(hi, lj) < 0.0);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lj_section_force(lo, lj) * lj_section_force(mid, lj) <= 0.0 ? hi : lo) = mid;
  }
  CHECK(std::abs(lo - g_eq) / g_eq > 1e-3);
}

TEST_CASE("regularization") {
  LennardJones lj;
  const double g_eq = lj_equilibrium_gap(lj);
  LennardJones reg = lj;
  reg.g_reg = 0.6 * g_eq;
  CHECK(lj_potential(*reg.g_reg, reg).value == lj_potential(*reg.g_reg, lj).value);
  for (double s : {1.0, 1.5, 3.0}) {
    const double g = s * *reg.g_reg;
    CHECK(lj_section_force(g, reg) == lj_section_force(g, lj));
  }
  const double h = 1e-9;
  const double fd = (lj_section_force(*reg.g_reg + h, lj) - lj_section_force(*reg.g_reg - h, lj)) / (2 * h);
  CHECK(lj_section_force(0.0, reg) == doctest::Approx(lj_section_force(*reg.g_reg, lj) - fd * *reg.g_reg).epsilon(1e-6));
  CHECK(std::isfinite(lj_potential(-1e-4, reg).value));

  LennardJones above = lj;
  above.g_reg = 1.2 * g_eq;
  CHECK_THROWS_AS(validate(InteractionLaw(above)), ValidationError);
  above.allow_reg_above_equilibrium = true;
  CHECK_NOTHROW(validate(InteractionLaw(above)));
  LennardJones wrong = lj;
  wrong.k_vdw = 1e-7;
  CHECK_THROWS_AS(validate(InteractionLaw(wrong)), ValidationError);
}

namespace {
struct Parallel {
  beam::HermiteElement el;
  Vec8 qa, qb;
};
Parallel parallel(double length, double distance, double offset = 0.0) {
  Parallel p{{length, 1.0, 1.0}, {}, {}};
  p.qa << 0, 0, 0, 1, 0, length, 0, 1;
  p.qb << distance, offset, 0, 1, distance, offset + length, 0, 1;
  return p;
}
}  // namespace

TEST_CASE("pair integration: gradients, tangent, balance") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const InteractionLaw laws[] = {Electrostatic{}, [] {
                                   LennardJones lj;
                                   lj.g_reg = 0.5 * lj_equilibrium_gap(lj);
                                   return lj;
                                 }()};
  for (const auto& law : laws) {
    const double dist = std::holds_alternative<Electrostatic>(law) ? 0.05 : 0.04 + 1.2e-3;
    auto p = parallel(0.078, dist);
    for (int i = 0; i < 8; ++i) {
      p.qa[i] += 1e-4 * u(rng);
      p.qb[i] += 1e-4 * u(rng);
    }
    const SSIPQuadrature quad{5, 10};
    const auto base = integrate_pair(p.el, p.el, p.qa, p.qb, law, quad);
    const double h = 1e-8;
    double grad_err = 0.0, tan_err = 0.0;
    for (int j = 0; j < 16; ++j) {
      Vec8 pa = p.qa, pb = p.qb, ma = p.qa, mb = p.qb;
      (j < 8 ? pa[j] : pb[j - 8]) += h;
      (j < 8 ? ma[j] : mb[j - 8]) -= h;
      const auto plus = integrate_pair(p.el, p.el, pa, pb, law, quad);
      const auto minus = integrate_pair(p.el, p.el, ma, mb, law, quad);
      grad_err = std::max(grad_err, std::abs((plus.energy - minus.energy) / (2 * h) - base.force[j]));
      tan_err = std::max(tan_err, ((plus.force - minus.force) / (2 * h) - base.tangent.col(j)).cwiseAbs().maxCoeff());
    }
    CHECK(grad_err / base.force.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(tan_err / base.tangent.cwiseAbs().maxCoeff() < 1e-6);
    CHECK((base.tangent - base.tangent.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * base.tangent.cwiseAbs().maxCoeff());
    Vec2 sum = Vec2::Zero();
    for (int k : {0, 4, 8, 12}) sum += base.force.segment<2>(k);
    CHECK(sum.norm() < 1e-12 * base.force.norm());
  }
}

TEST_CASE("electrostatic quadrature converges monotonically") {
  const auto p = parallel(5.0 / 16, 0.04);
  const InteractionLaw law = Electrostatic{};
  const double ref = integrate_pair(p.el, p.el, p.qa, p.qb, law, {16, 20}).energy;
  double last = 1.0;
  for (int s : {1, 2, 4, 8}) {
    const double err = std::abs(integrate_pair(p.el, p.el, p.qa, p.qb, law, {s, 10}).energy / ref - 1.0);
    CHECK(err <= last);
    last = err;
  }
  // Doubling the baseline rule at one radius of separation.
  const auto far = parallel(5.0 / 16, 0.08);
  const double a = integrate_pair(far.el, far.el, far.qa, far.qb, law, {2, 10}).energy;
  const double b = integrate_pair(far.el, far.el, far.qa, far.qb, law, {4, 10}).energy;
  CHECK(std::abs(a / b - 1.0) < 1e-8);
}

TEST_CASE("cutoff gives exactly zero beyond range") {
  LennardJones lj;
  lj.cutoff = 0.1;
  const auto p = parallel(0.078, 0.2);
  const auto r = integrate_pair(p.el, p.el, p.qa, p.qb, lj, {5, 10});
  CHECK(r.energy == 0.0);
  CHECK(r.force.norm() == 0.0);
}

TEST_CASE("singular law evaluation is reported") {
  const auto p = parallel(0.078, 0.04);
  CHECK_THROWS_AS(integrate_pair(p.el, p.el, p.qa, p.qb, LennardJones{}, {5, 10}), NonFiniteError);
}

TEST_CASE("scalar and avx2 kernels agree") {
  if (!kernels::avx2_supported()) return;
  const auto before = kernels::active_isa();
  const auto p = parallel(0.078, 0.0412, 0.01);
  LennardJones lj;
  lj.g_reg = 0.4 * lj_equilibrium_gap(lj);
  for (const InteractionLaw& law : {InteractionLaw(Electrostatic{}), InteractionLaw(lj)}) {
    kernels::select_isa(kernels::Isa::Scalar);
    const auto a = integrate_pair(p.el, p.el, p.qa, p.qb, law, {5, 7});
    kernels::select_isa(kernels::Isa::Avx2);
    const auto b = integrate_pair(p.el, p.el, p.qa, p.qb, law, {5, 7});
    CHECK(std::abs(a.energy - b.energy) <= 1e-13 * std::abs(a.energy));
    CHECK((a.force - b.force).cwiseAbs().maxCoeff() <= 1e-13 * a.force.cwiseAbs().maxCoeff());
    CHECK((a.tangent - b.tangent).cwiseAbs().maxCoeff() <= 1e-13 * a.tangent.cwiseAbs().maxCoeff());
  }
  kernels::select_isa(before);
}
