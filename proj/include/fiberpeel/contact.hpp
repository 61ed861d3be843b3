#pragma once

#include <string>
#include <vector>

#include "fiberpeel/model.hpp"
#include "fiberpeel/types.hpp"

namespace fiberpeel::contact {

struct ContactLaw {
  double penalty = 100.0;  // line penalty epsilon
  double gbar = 0.002;     // regularization gap
};

struct ContactQuadrature {
  int n_segments = 20;
  int n_points = 5;
};

/// Closest point on a master fiber.
struct Projection {
  int element = -1;
  double xi = 0.0;
  Vec2 point = Vec2::Zero();
  double distance = 0.0;
  bool clamped = false;   // minimizer sits on a fiber end without orthogonality
  bool fallback = false;  // dense sampling was needed
};

struct GapSample {
  double slave_s = 0.0;  // reference arc coordinate on the slave fiber
  int slave_element = 0;
  double slave_xi = 0.0;
  int master_element = 0;
  double master_xi = 0.0;
  double gap = 0.0;
  Vec2 midpoint = Vec2::Zero();  // halfway between the two surfaces
};

struct PenaltyValue {
  double pressure = 0.0;
  double slope = 0.0;  // dp/dg
};

/// C1 regularized penalty law: zero above gbar, quadratic on [0, gbar), linear below 0.
PenaltyValue penalty_pressure(double g, const ContactLaw& law);
/// Potential density with d(potential)/dg = -pressure.
double penalty_potential(double g, const ContactLaw& law);

void validate(const ContactLaw& law);

Projection closest_point_projection(const Vec2& point, const model::Model& model, const Vector& q, int master_fiber);

/// Relative orthogonality residual |(x - c).c'| / (|x - c| |c'|) of a projection.
double orthogonality_residual(const Vec2& point, const model::Model& model, const Vector& q, int master_fiber,
                              const Projection& projection);

struct ContactResult {
  double energy = 0.0;
  Vector force;   // gradient over all DOFs
  Matrix tangent;  // empty unless requested
  std::vector<GapSample> active;
  int fallback_count = 0;
};

ContactResult contact_forces(const model::Model& model, const Vector& q, int slave_fiber, int master_fiber,
                             const ContactLaw& law, const ContactQuadrature& quadrature, bool with_tangent);

/// Gap at every slave quadrature point (no activity filter). Used for output and statistics.
std::vector<GapSample> gap_field(const model::Model& model, const Vector& q, int slave_fiber, int master_fiber,
                                 const ContactQuadrature& quadrature);

class ContactProvider final : public model::ForceProvider {
 public:
  ContactProvider(int slave_fiber, int master_fiber, ContactLaw law, ContactQuadrature quadrature);
  std::string name() const override { return "contact"; }
  double add_to(const model::Model& model, const Vector& q, Vector& residual, Matrix* tangent) const override;

  const ContactLaw& law() const noexcept { return law_; }
  const ContactQuadrature& quadrature() const noexcept { return quadrature_; }

 private:
  int slave_;
  int master_;
  ContactLaw law_;
  ContactQuadrature quadrature_;
};

}  // namespace fiberpeel::contact
