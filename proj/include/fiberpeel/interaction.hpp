#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fiberpeel/beam.hpp"
#include "fiberpeel/kernels.hpp"
#include "fiberpeel/model.hpp"
#include "fiberpeel/types.hpp"

namespace fiberpeel::interaction {

/// Monopole electrostatic SSIP between uniformly charged circular sections.
struct Electrostatic {
  double sigma1 = 1.0;
  double sigma2 = -1.0;
  double k = 0.1;  // Coulomb prefactor
  double radius1 = 0.02;
  double radius2 = 0.02;
};

/// Lennard-Jones SSIP (vdW attraction + repulsive part), optionally regularized
/// below g_reg and truncated at a center-center cutoff distance.
struct LennardJones {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double k_vdw = -1e-7;
  double k_replj = 5e-25;
  double radius1 = 0.02;
  double radius2 = 0.02;
  std::optional<double> g_reg;
  std::optional<double> cutoff;
  /// Allows g_reg above the parallel-fiber equilibrium gap (otherwise rejected).
  bool allow_reg_above_equilibrium = false;
};

using InteractionLaw = std::variant<Electrostatic, LennardJones>;

/// Disk-disk integration constant of the repulsive SSIP (prefactor relative to k_replj).
inline constexpr double kRepulsivePrefactor = 5.30e-3;
/// Ratio of the parallel-cylinder LJ equilibrium gap to the point-pair equilibrium distance.
inline constexpr double kParallelEquilibriumFactor = 0.57169;

struct LawValue {
  double value = 0.0;
  double d1 = 0.0;  // derivative w.r.t. the law's argument
  double d2 = 0.0;
};

/// Potential per length^2 as function of the centroid distance d > 0.
LawValue ssip_elstat(double d, const Electrostatic& law);
/// vdW SSIP as function of the surface gap g > 0.
LawValue ssip_vdw(double g, const LennardJones& law);
/// Repulsive LJ SSIP as function of the surface gap g > 0.
LawValue ssip_replj(double g, const LennardJones& law);
/// Combined LJ SSIP with the regularization applied below g_reg.
LawValue lj_potential(double g, const LennardJones& law);
/// Section-pair force law f(g) = -d/dg (vdW + repLJ), linearly extrapolated below g_reg.
double lj_section_force(double g, const LennardJones& law);

/// Point-pair LJ equilibrium distance (-2 k_replj / k_vdw)^(1/6).
double lj_point_equilibrium(const LennardJones& law);
/// Equilibrium gap of two parallel cylinders, 0.57169 * point-pair equilibrium distance.
double lj_equilibrium_gap(const LennardJones& law);
/// Hamaker constant pi^2 rho1 rho2 k_vdw. Informational only.
double hamaker_constant(const LennardJones& law);

/// Throws ValidationError for inconsistent parameters (signs, g_reg above equilibrium).
void validate(const InteractionLaw& law);

kernels::LawParams make_kernel_law(const InteractionLaw& law);

struct SSIPQuadrature {
  int n_segments = 2;
  int n_points = 10;
};

struct PairResult {
  double energy = 0.0;
  Vec16 force = Vec16::Zero();      // [element A DOFs, element B DOFs]
  Mat16 tangent = Mat16::Zero();
};

/// Double quadrature of the SSIP over one element pair. Forces and tangent are
/// exact derivatives of the discrete energy. Throws NonFiniteError on singular law evaluations.
PairResult integrate_pair(const beam::HermiteElement& element_a, const beam::HermiteElement& element_b,
                          const Vec8& qa, const Vec8& qb, const InteractionLaw& law, const SSIPQuadrature& quadrature);

/// Element pairs (index in fiber A, index in fiber B) whose contribution can be nonzero.
/// With a cutoff, pairs whose control-polygon boxes are farther apart than
/// cutoff + one element length are dropped; without a cutoff every pair is kept.
std::vector<std::pair<int, int>> interaction_pair_schedule(const model::Model& model, const Vector& q, int fiber_a,
                                                           int fiber_b, const InteractionLaw& law);

/// Fiber-fiber SSIP interaction as an assembly contribution.
class InteractionProvider final : public model::ForceProvider {
 public:
  InteractionProvider(int fiber_a, int fiber_b, InteractionLaw law, SSIPQuadrature quadrature,
                      bool use_schedule = true);
  std::string name() const override { return "interaction"; }
  double add_to(const model::Model& model, const Vector& q, Vector& residual, Matrix* tangent) const override;

  const InteractionLaw& law() const noexcept { return law_; }

 private:
  int fiber_a_;
  int fiber_b_;
  InteractionLaw law_;
  SSIPQuadrature quadrature_;
  bool use_schedule_;
};

}  // namespace fiberpeel::interaction
