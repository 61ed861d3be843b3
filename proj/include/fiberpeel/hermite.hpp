#pragma once

#include <array>

#include "fiberpeel/types.hpp"

namespace fiberpeel {

/// Cubic Hermite shape values on one element. Index order follows the element
/// DOF blocks: (position 0, tangent 0, position 1, tangent 1). Derivatives are
/// taken with respect to reference arc length.
struct HermiteShapes {
  std::array<double, 4> value;
  std::array<double, 4> d1;
  std::array<double, 4> d2;
};

/// Shapes at local coordinate xi in [-1, 1] for an element of reference length `length`.
HermiteShapes hermite_shapes(double xi, double length);

/// Position shape values only (cheaper; used by interaction quadrature).
std::array<double, 4> hermite_values(double xi, double length);

/// r = sum_k N_k d_k for element DOFs q = [x0 y0 tx0 ty0 x1 y1 tx1 ty1].
inline Vec2 combine(const std::array<double, 4>& shape, const Vec8& q) {
  return Vec2(shape[0] * q[0] + shape[1] * q[2] + shape[2] * q[4] + shape[3] * q[6],
              shape[0] * q[1] + shape[1] * q[3] + shape[2] * q[5] + shape[3] * q[7]);
}

}  // namespace fiberpeel
