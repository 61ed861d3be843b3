#include <doctest.h>

#include <random>

#include "fiberpeel/contact.hpp"
#include "fiberpeel/errors.hpp"
#include "fiberpeel/interaction.hpp"
#include "fiberpeel/model.hpp"
#include "fiberpeel/verification.hpp"

using namespace fiberpeel;
using namespace fiberpeel::model;

namespace {
class ConstantForce final : public ForceProvider {
 public:
  explicit ConstantForce(Vector f) : f_(std::move(f)) {}
  std::string name() const override { return "constant"; }
  double add_to(const Model&, const Vector& q, Vector& residual, Matrix*) const override {
    residual += f_;
    return f_.dot(q);
  }

 private:
  Vector f_;
};
}  // namespace

TEST_CASE("two-fiber mesh layout") {
  const auto sys = build_two_fiber_model({});
  const auto& m = sys.model;
  CHECK(m.fiber(0).n_nodes() == 17);
  CHECK(m.fiber(1).element_length() == doctest::Approx(0.3125));
  for (int n = 0; n < 17; ++n) CHECK(m.node_position(sys.state.q, 1, n).x() == doctest::Approx(0.04));
  CHECK(m.fiber(0).slenderness() == doctest::Approx(250.0));
  CHECK(m.dofs().driven_dofs().size() == 2);
}

TEST_CASE("stress-free reference has zero residual and reactions") {
  const auto sys = build_two_fiber_model({});
  const auto a = sys.model.assemble(sys.state.q, true);
  CHECK(a.residual.cwiseAbs().maxCoeff() < 1e-12);
  const auto r = sys.model.extract_reactions(sys.state);
  CHECK(std::abs(r.total_fx) < 1e-12);
  for (const auto& s : r.supports) CHECK(s.force.norm() < 1e-12);
}

TEST_CASE("separation sets the initial surface gap") {
  TwoFiberSpec spec;
  spec.n_elements = 64;
  const double g_eq = interaction::lj_equilibrium_gap(interaction::LennardJones{});
  spec.separation = 2 * spec.radius + g_eq;
  const auto sys = build_two_fiber_model(spec);
  const auto gaps = contact::gap_field(sys.model, sys.state.q, 0, 1, {5, 10});
  REQUIRE(!gaps.empty());
  for (const auto& g : gaps) CHECK(g.gap == doctest::Approx(8.3913e-4).epsilon(5e-5));
}

TEST_CASE("single-element fiber is still well-posed") {
  TwoFiberSpec spec;
  spec.n_elements = 1;
  auto sys = build_two_fiber_model(spec);
  CHECK(sys.model.fiber(0).n_nodes() == 2);
  const auto a = sys.model.assemble(sys.state.q, true);
  CHECK(a.tangent.rows() == static_cast<Eigen::Index>(sys.model.dofs().size()));
}

TEST_CASE("assembled residual is the sum of providers") {
  auto sys = build_two_fiber_model({});
  const auto n = static_cast<Eigen::Index>(sys.model.dofs().size());
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector f1(n), f2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    f1[i] = u(rng);
    f2[i] = u(rng);
  }
  const Vector beam_only = sys.model.assemble(sys.state.q, false).residual;
  sys.model.add_provider(std::make_shared<ConstantForce>(f1));
  sys.model.add_provider(std::make_shared<ConstantForce>(f2));
  const auto a = sys.model.assemble(sys.state.q, false);
  CHECK((a.residual - f1 - f2 - beam_only).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("assembled beam tangent matches finite differences") {
  auto sys = build_two_fiber_model({});
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Vector q = sys.state.q;
  for (auto d : sys.model.dofs().free_dofs()) q[d] += 1e-3 * u(rng);
  CHECK(verification::assembled_tangent_error(sys.model, q, 1e-7) < 1e-6);
}

TEST_CASE("non-finite contributions name the provider") {
  auto sys = build_two_fiber_model({});
  Vector f = Vector::Zero(static_cast<Eigen::Index>(sys.model.dofs().size()));
  f[5] = std::numeric_limits<double>::quiet_NaN();
  sys.model.add_provider(std::make_shared<ConstantForce>(f));
  try {
    sys.model.assemble(sys.state.q, false);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(std::string(e.what()).find("constant") != std::string::npos);
  }
}

TEST_CASE("reactions are the residual at constrained DOFs") {
  auto sys = build_two_fiber_model({});
  const auto n = static_cast<Eigen::Index>(sys.model.dofs().size());
  Vector r = Vector::Zero(n);
  for (auto d : sys.model.dofs().driven_dofs()) r[d] = 0.25;
  const auto set = sys.model.reactions_from_residual(r);
  CHECK(set.total_fx == doctest::Approx(0.5));
}
