#include "fiberpeel/quadrature.hpp"

#include <cmath>

#include "fiberpeel/errors.hpp"
#include "fiberpeel/types.hpp"

namespace fiberpeel {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("Gauss rule needs at least one point");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      dp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / dp;
      z -= step;
      if (std::abs(step) <= 1e-15) break;
    }
    rule.points[i] = -z;
    rule.points[n - 1 - i] = z;
    rule.weights[i] = rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule segmented_gauss_rule(int n_segments, int n_points) {
  if (n_segments < 1) throw ValidationError("need at least one integration segment");
  const QuadratureRule base = gauss_legendre(n_points);
  QuadratureRule rule;
  rule.points.reserve(static_cast<std::size_t>(n_segments) * base.size());
  rule.weights.reserve(rule.points.capacity());
  const double width = 2.0 / n_segments;
  for (int s = 0; s < n_segments; ++s) {
    const double left = -1.0 + s * width;
    for (std::size_t g = 0; g < base.size(); ++g) {
      rule.points.push_back(left + 0.5 * width * (base.points[g] + 1.0));
      rule.weights.push_back(0.5 * width * base.weights[g]);
    }
  }
  return rule;
}

}  // namespace fiberpeel
