#pragma once

#include <array>
#include <cstddef>

#include "fiberpeel/types.hpp"

namespace fiberpeel::beam {

/// Planar shear-rigid, torsion-free beam element with a C1 cubic Hermite centerline.
struct HermiteElement {
  double ref_length = 1.0;
  double axial_stiffness = 1.0;    // EA
  double bending_stiffness = 1.0;  // EI
};

struct CenterlinePoint {
  Vec2 r;
  Vec2 dr;   // dr/ds
  Vec2 ddr;  // d2r/ds2
};

struct StrainState {
  double axial = 0.0;      // |r'| - 1
  double curvature = 0.0;  // (r' x r'') / |r'|^2
};

struct ElementResponse {
  double energy = 0.0;
  Vec8 force = Vec8::Zero();
  Mat8 tangent = Mat8::Zero();
};

/// Number of Gauss points used for the internal-force integral.
inline constexpr int kInternalGaussPoints = 4;

/// Norm of r' below which the element is considered degenerate.
inline constexpr double kTangentDegeneracy = 1e-12;

CenterlinePoint interpolate(const HermiteElement& element, double xi, const Vec8& q);

StrainState strains(const HermiteElement& element, double xi, const Vec8& q);

/// Internal energy, its gradient and Hessian with respect to the 8 element DOFs.
/// Throws GeometryError if |r'| drops to the degeneracy threshold at a Gauss point.
ElementResponse element_energy_force_tangent(const HermiteElement& element, const Vec8& q);

/// Max relative entry error between K and central differences of f_int with step `step`.
double verify_tangent(const HermiteElement& element, const Vec8& q, double step);

}  // namespace fiberpeel::beam
