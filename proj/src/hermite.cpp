#include "fiberpeel/hermite.hpp"

namespace fiberpeel {

HermiteShapes hermite_shapes(double xi, double length) {
  const double t = 0.5 * (1.0 + xi);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double L = length;
  HermiteShapes h;
  h.value = {2.0 * t3 - 3.0 * t2 + 1.0, L * (t3 - 2.0 * t2 + t), -2.0 * t3 + 3.0 * t2, L * (t3 - t2)};
  h.d1 = {(6.0 * t2 - 6.0 * t) / L, 3.0 * t2 - 4.0 * t + 1.0, (6.0 * t - 6.0 * t2) / L, 3.0 * t2 - 2.0 * t};
  h.d2 = {(12.0 * t - 6.0) / (L * L), (6.0 * t - 4.0) / L, (6.0 - 12.0 * t) / (L * L), (6.0 * t - 2.0) / L};
  return h;
}

std::array<double, 4> hermite_values(double xi, double length) {
  const double t = 0.5 * (1.0 + xi);
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {2.0 * t3 - 3.0 * t2 + 1.0, length * (t3 - 2.0 * t2 + t), -2.0 * t3 + 3.0 * t2, length * (t3 - t2)};
}

}  // namespace fiberpeel
