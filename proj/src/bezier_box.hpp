#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "fiberpeel/types.hpp"

namespace fiberpeel::detail {

// Axis-aligned box of the Bezier control polygon of a Hermite element; it bounds the curve.
struct Box {
  Vec2 lo, hi;
};

inline Box control_box(double ref_length, const Vec8& q) {
  const double third = ref_length / 3.0;
  const Vec2 p0 = q.segment<2>(0);
  const Vec2 p1 = q.segment<2>(4);
  const std::array<Vec2, 4> pts{p0, p0 + third * q.segment<2>(2), p1 - third * q.segment<2>(6), p1};
  Box b{pts[0], pts[0]};
  for (const auto& p : pts) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  return b;
}

inline double box_distance(const Box& a, const Box& b) {
  const double dx = std::max({0.0, a.lo.x() - b.hi.x(), b.lo.x() - a.hi.x()});
  const double dy = std::max({0.0, a.lo.y() - b.hi.y(), b.lo.y() - a.hi.y()});
  return std::hypot(dx, dy);
}

inline double point_box_distance(const Vec2& p, const Box& b) {
  const double dx = std::max({0.0, b.lo.x() - p.x(), p.x() - b.hi.x()});
  const double dy = std::max({0.0, b.lo.y() - p.y(), p.y() - b.hi.y()});
  return std::hypot(dx, dy);
}

}  // namespace fiberpeel::detail
