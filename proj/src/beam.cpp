#include "fiberpeel/beam.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fiberpeel/errors.hpp"
#include "fiberpeel/hermite.hpp"
#include "fiberpeel/quadrature.hpp"

namespace fiberpeel::beam {
namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

const QuadratureRule& internal_rule() {
  static const QuadratureRule rule = gauss_legendre(kInternalGaussPoints);
  return rule;
}

// Maps element DOFs to z = (r'_x, r'_y, r''_x, r''_y).
Mat48 strain_operator(const HermiteShapes& h) {
  Mat48 B = Mat48::Zero();
  for (int k = 0; k < 4; ++k) {
    B(0, 2 * k) = h.d1[k];
    B(1, 2 * k + 1) = h.d1[k];
    B(2, 2 * k) = h.d2[k];
    B(3, 2 * k + 1) = h.d2[k];
  }
  return B;
}

struct Density {
  double value;
  Vec4 grad;
  Mat4 hess;
};

// Energy density 1/2 EA eps^2 + 1/2 EI kappa^2 as a function of z.
Density energy_density(const Vec4& z, double ea, double ei) {
  const Vec2 a = z.head<2>();
  const Vec2 b = z.tail<2>();
  const double s = a.squaredNorm();
  const double n = std::sqrt(s);
  if (!(n > kTangentDegeneracy)) throw GeometryError("degenerate centerline tangent (|r'| ~ 0)");

  const double eps = n - 1.0;
  const double c = a.x() * b.y() - a.y() * b.x();
  const double kappa = c / s;

  const Vec2 p(b.y(), -b.x());   // dc/da
  const Vec2 qv(-a.y(), a.x());  // dc/db
  const Vec2 kappa_a = p / s - 2.0 * c * a / (s * s);
  const Vec2 kappa_b = qv / s;

  Mat2 kappa_aa = -2.0 * (p * a.transpose() + a * p.transpose()) / (s * s) - 2.0 * c / (s * s) * Mat2::Identity() +
                  8.0 * c * a * a.transpose() / (s * s * s);
  Mat2 dp_db;
  dp_db << 0.0, 1.0, -1.0, 0.0;
  const Mat2 kappa_ab = dp_db / s - 2.0 * a * qv.transpose() / (s * s);

  Density d;
  d.value = 0.5 * ea * eps * eps + 0.5 * ei * kappa * kappa;
  d.grad.head<2>() = ea * (1.0 - 1.0 / n) * a + ei * kappa * kappa_a;
  d.grad.tail<2>() = ei * kappa * kappa_b;
  d.hess.topLeftCorner<2, 2>() = ea * ((1.0 - 1.0 / n) * Mat2::Identity() + a * a.transpose() / (s * n)) +
                                 ei * (kappa_a * kappa_a.transpose() + kappa * kappa_aa);
  d.hess.topRightCorner<2, 2>() = ei * (kappa_a * kappa_b.transpose() + kappa * kappa_ab);
  d.hess.bottomLeftCorner<2, 2>() = d.hess.topRightCorner<2, 2>().transpose();
  d.hess.bottomRightCorner<2, 2>() = ei * kappa_b * kappa_b.transpose();
  return d;
}

}  // namespace

CenterlinePoint interpolate(const HermiteElement& element, double xi, const Vec8& q) {
  const HermiteShapes h = hermite_shapes(xi, element.ref_length);
  return {combine(h.value, q), combine(h.d1, q), combine(h.d2, q)};
}

StrainState strains(const HermiteElement& element, double xi, const Vec8& q) {
  const CenterlinePoint p = interpolate(element, xi, q);
  const double s = p.dr.squaredNorm();
  return {std::sqrt(s) - 1.0, (p.dr.x() * p.ddr.y() - p.dr.y() * p.ddr.x()) / s};
}

ElementResponse element_energy_force_tangent(const HermiteElement& element, const Vec8& q) {
  const QuadratureRule& rule = internal_rule();
  const double jacobian = 0.5 * element.ref_length;
  ElementResponse out;
  for (std::size_t g = 0; g < rule.size(); ++g) {
    const Mat48 B = strain_operator(hermite_shapes(rule.points[g], element.ref_length));
    const Vec4 z = B * q;
    const Density d = energy_density(z, element.axial_stiffness, element.bending_stiffness);
    const double w = rule.weights[g] * jacobian;
    out.energy += w * d.value;
    out.force.noalias() += w * B.transpose() * d.grad;
    out.tangent.noalias() += w * B.transpose() * d.hess * B;
  }
  return out;
}

double verify_tangent(const HermiteElement& element, const Vec8& q, double step) {
  const ElementResponse base = element_energy_force_tangent(element, q);
  Mat8 fd;
  for (int j = 0; j < 8; ++j) {
    Vec8 qp = q;
    Vec8 qm = q;
    qp[j] += step;
    qm[j] -= step;
    fd.col(j) = (element_energy_force_tangent(element, qp).force - element_energy_force_tangent(element, qm).force) /
                (2.0 * step);
  }
  const double scale = std::max(base.tangent.cwiseAbs().maxCoeff(), 1e-300);
  return (fd - base.tangent).cwiseAbs().maxCoeff() / scale;
}

}  // namespace fiberpeel::beam
