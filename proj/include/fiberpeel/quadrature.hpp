#pragma once

#include <vector>

namespace fiberpeel {

/// Quadrature rule on the reference interval [-1, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const noexcept { return points.size(); }
};

/// n-point Gauss-Legendre rule, n >= 1.
QuadratureRule gauss_legendre(int n);

/// Composite rule: [-1, 1] split into `n_segments` equal parts, each carrying an
/// `n_points` Gauss-Legendre rule.
QuadratureRule segmented_gauss_rule(int n_segments, int n_points);

}  // namespace fiberpeel
