#include "fiberpeel/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bezier_box.hpp"
#include "fiberpeel/errors.hpp"
#include "fiberpeel/hermite.hpp"
#include "fiberpeel/quadrature.hpp"

namespace fiberpeel::contact {
namespace {

constexpr int kSeeds = 5;
constexpr int kMaxLocalIterations = 50;
constexpr int kFallbackSamples = 200;
constexpr double kOrthogonalityTol = 1e-13;

struct CurveEval {
  Vec2 r, a, b;  // position and derivatives with respect to the local coordinate
};

CurveEval evaluate(double length, const Vec8& q, double eta) {
  const HermiteShapes h = hermite_shapes(eta, length);
  const double jac = 0.5 * length;
  return {combine(h.value, q), combine(h.d1, q) * jac, combine(h.d2, q) * (jac * jac)};
}

struct MasterCache {
  double length = 0.0;
  std::vector<Vec8> dofs;
  std::vector<detail::Box> boxes;

  MasterCache(const model::Model& model, const Vector& q, int fiber) {
    const auto& mesh = model.fiber(fiber);
    length = mesh.element_length();
    for (int e = 0; e < mesh.n_elements; ++e) {
      dofs.push_back(model.element_dofs(q, fiber, e));
      boxes.push_back(detail::control_box(length, dofs.back()));
    }
  }
  int size() const { return static_cast<int>(dofs.size()); }
};

struct LocalResult {
  double eta = 0.0;
  double distance = std::numeric_limits<double>::infinity();
  bool converged = false;
};

LocalResult local_newton(const Vec2& p, double length, const Vec8& q, double eta) {
  for (int it = 0; it < kMaxLocalIterations; ++it) {
    const CurveEval c = evaluate(length, q, eta);
    const Vec2 x = p - c.r;
    const double f1 = -x.dot(c.a);
    const double scale = x.norm() * c.a.norm();
    if (scale == 0.0 || std::abs(f1) <= kOrthogonalityTol * scale) return {eta, x.norm(), true};
    const double f2 = c.a.squaredNorm() - x.dot(c.b);
    double step = f2 > 0.0 ? -f1 / f2 : (f1 > 0.0 ? -0.5 : 0.5);
    step = std::clamp(step, -1.0, 1.0);
    const double next = std::clamp(eta + step, -1.0, 1.0);
    if (next == eta || std::abs(next - eta) < 1e-15) return {eta, x.norm(), true};
    eta = next;
  }
  return {};
}

LocalResult dense_search(const Vec2& p, double length, const Vec8& q) {
  auto dist = [&](double eta) { return (p - evaluate(length, q, eta).r).norm(); };
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const double h = 2.0 / (kFallbackSamples - 1);
  for (int k = 0; k < kFallbackSamples; ++k) {
    const double d = dist(-1.0 + k * h);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  double lo = std::max(-1.0, -1.0 + (best - 1) * h);
  double hi = std::min(1.0, -1.0 + (best + 1) * h);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double d1 = dist(x1), d2 = dist(x2);
  while (hi - lo > 1e-14) {
    if (d1 < d2) {
      hi = x2;
      x2 = x1;
      d2 = d1;
      x1 = hi - ratio * (hi - lo);
      d1 = dist(x1);
    } else {
      lo = x1;
      x1 = x2;
      d1 = d2;
      x2 = lo + ratio * (hi - lo);
      d2 = dist(x2);
    }
  }
  const double eta = 0.5 * (lo + hi);
  return {eta, dist(eta), true};
}

Projection project(const Vec2& p, const MasterCache& master) {
  std::vector<double> box_d(master.size());
  for (int e = 0; e < master.size(); ++e) box_d[e] = detail::point_box_distance(p, master.boxes[e]);
  std::vector<int> order(master.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return box_d[a] < box_d[b]; });

  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (int e : order) {
    if (box_d[e] > best.distance) break;
    LocalResult local;
    bool any = false;
    for (int s = 0; s < kSeeds; ++s) {
      const LocalResult r = local_newton(p, master.length, master.dofs[e], -1.0 + 2.0 * s / (kSeeds - 1));
      if (r.converged) {
        any = true;
        if (r.distance < local.distance) local = r;
      }
    }
    bool fallback = false;
    if (!any) {
      local = dense_search(p, master.length, master.dofs[e]);
      fallback = true;
    }
    if (local.distance < best.distance) {
      best.element = e;
      best.xi = local.eta;
      best.distance = local.distance;
      best.fallback = fallback;
    }
  }
  const CurveEval c = evaluate(master.length, master.dofs[best.element], best.xi);
  best.point = c.r;
  const bool at_end = (best.element == 0 && best.xi == -1.0) || (best.element == master.size() - 1 && best.xi == 1.0);
  if (at_end) {
    const Vec2 x = p - c.r;
    const double scale = x.norm() * c.a.norm();
    best.clamped = scale > 0.0 && std::abs(x.dot(c.a)) > 1e-10 * scale;
  }
  return best;
}

struct SlaveCache {
  double length = 0.0;
  QuadratureRule rule;
  std::vector<Vec8> dofs;
  std::vector<detail::Box> boxes;
  std::vector<std::array<double, 4>> shapes;

  SlaveCache(const model::Model& model, const Vector& q, int fiber, const ContactQuadrature& quadrature)
      : rule(segmented_gauss_rule(quadrature.n_segments, quadrature.n_points)) {
    const auto& mesh = model.fiber(fiber);
    length = mesh.element_length();
    for (int e = 0; e < mesh.n_elements; ++e) {
      dofs.push_back(model.element_dofs(q, fiber, e));
      boxes.push_back(detail::control_box(length, dofs.back()));
    }
    for (double xi : rule.points) shapes.push_back(hermite_values(xi, length));
  }
};

GapSample make_sample(const SlaveCache& slave, int e, std::size_t i, const Vec2& p, const Projection& proj,
                      double r_slave, double r_master) {
  GapSample s;
  s.slave_element = e;
  s.slave_xi = slave.rule.points[i];
  s.slave_s = (e + 0.5 * (1.0 + s.slave_xi)) * slave.length;
  s.master_element = proj.element;
  s.master_xi = proj.xi;
  s.gap = proj.distance - r_slave - r_master;
  const Vec2 n = proj.distance > 0.0 ? Vec2((p - proj.point) / proj.distance) : Vec2::Zero();
  // Surfaces sit at p - r_slave n and c + r_master n.
  s.midpoint = 0.5 * ((p - r_slave * n) + (proj.point + r_master * n));
  return s;
}

}  // namespace

PenaltyValue penalty_pressure(double g, const ContactLaw& law) {
  const double eps = law.penalty;
  const double gb = law.gbar;
  if (g >= gb) return {0.0, 0.0};
  if (g >= 0.0) return {eps * (gb - g) * (gb - g) / (2.0 * gb), -eps * (gb - g) / gb};
  return {eps * (0.5 * gb - g), -eps};
}

double penalty_potential(double g, const ContactLaw& law) {
  const double eps = law.penalty;
  const double gb = law.gbar;
  if (g >= gb) return 0.0;
  if (g >= 0.0) return eps * (gb - g) * (gb - g) * (gb - g) / (6.0 * gb);
  return eps * (gb * gb / 6.0 - 0.5 * g * gb + 0.5 * g * g);
}

void validate(const ContactLaw& law) {
  if (!(law.penalty > 0.0)) throw ValidationError("penalty must be positive", "contact.penalty");
  if (!(law.gbar > 0.0)) throw ValidationError("regularization gap must be positive", "contact.gbar");
}

Projection closest_point_projection(const Vec2& point, const model::Model& model, const Vector& q, int master_fiber) {
  return project(point, MasterCache(model, q, master_fiber));
}

double orthogonality_residual(const Vec2& point, const model::Model& model, const Vector& q, int master_fiber,
                              const Projection& projection) {
  const auto& mesh = model.fiber(master_fiber);
  const CurveEval c =
      evaluate(mesh.element_length(), model.element_dofs(q, master_fiber, projection.element), projection.xi);
  const Vec2 x = point - c.r;
  const double scale = x.norm() * c.a.norm();
  return scale > 0.0 ? std::abs(x.dot(c.a)) / scale : 0.0;
}

ContactResult contact_forces(const model::Model& model, const Vector& q, int slave_fiber, int master_fiber,
                             const ContactLaw& law, const ContactQuadrature& quadrature, bool with_tangent) {
  const std::size_t n = model.dofs().size();
  ContactResult out;
  out.force = Vector::Zero(n);
  if (with_tangent) out.tangent = Matrix::Zero(n, n);

  const SlaveCache slave(model, q, slave_fiber, quadrature);
  const MasterCache master(model, q, master_fiber);
  const double rs = model.fiber(slave_fiber).radius;
  const double rm = model.fiber(master_fiber).radius;
  const double reach = rs + rm + law.gbar;
  const double jac = 0.5 * slave.length;

  for (int e = 0; e < static_cast<int>(slave.dofs.size()); ++e) {
    double near = std::numeric_limits<double>::infinity();
    for (const auto& b : master.boxes) near = std::min(near, detail::box_distance(slave.boxes[e], b));
    if (near > reach) continue;
    const auto sdofs = model.dofs().element_dofs(slave_fiber, e);

    for (std::size_t i = 0; i < slave.rule.size(); ++i) {
      const auto& ns = slave.shapes[i];
      const Vec2 p = combine(ns, slave.dofs[e]);
      const Projection proj = project(p, master);
      if (proj.fallback) ++out.fallback_count;
      const double d = proj.distance;
      const double g = d - rs - rm;
      if (g >= law.gbar) continue;
      if (!(d > 0.0)) throw GeometryError("contact point lies on the master centerline");

      const double w = slave.rule.weights[i] * jac;
      const PenaltyValue pv = penalty_pressure(g, law);
      out.energy += w * penalty_potential(g, law);
      out.active.push_back(make_sample(slave, e, i, p, proj, rs, rm));

      const Vec8& qm = master.dofs[proj.element];
      const HermiteShapes hm = hermite_shapes(proj.xi, master.length);
      const double mjac = 0.5 * master.length;
      const CurveEval c = evaluate(master.length, qm, proj.xi);
      const Vec2 nrm = (p - c.r) / d;
      const Vec2 tan(-nrm.y(), nrm.x());

      Vec16 grad, tw, wv;
      for (int k = 0; k < 4; ++k)
        for (int cc = 0; cc < 2; ++cc) {
          grad[2 * k + cc] = ns[k] * nrm[cc];
          grad[8 + 2 * k + cc] = -hm.value[k] * nrm[cc];
          tw[2 * k + cc] = ns[k] * tan[cc];
          tw[8 + 2 * k + cc] = -hm.value[k] * tan[cc];
          wv[2 * k + cc] = ns[k] * c.a[cc];
          wv[8 + 2 * k + cc] = -hm.value[k] * c.a[cc] + d * hm.d1[k] * mjac * nrm[cc];
        }

      const auto mdofs = model.dofs().element_dofs(master_fiber, proj.element);
      std::array<std::size_t, 16> dofs{};
      std::copy(sdofs.begin(), sdofs.end(), dofs.begin());
      std::copy(mdofs.begin(), mdofs.end(), dofs.begin() + 8);
      for (int r = 0; r < 16; ++r) out.force[dofs[r]] -= w * pv.pressure * grad[r];

      if (!with_tangent) continue;
      Mat16 hess = tw * tw.transpose() / d;
      if (!proj.clamped) {
        const double denom = d * (c.a.squaredNorm() - d * nrm.dot(c.b));
        hess -= wv * wv.transpose() / denom;
      }
      const Mat16 k = w * (-pv.slope * grad * grad.transpose() - pv.pressure * hess);
      for (int r = 0; r < 16; ++r)
        for (int cc = 0; cc < 16; ++cc) out.tangent(dofs[r], dofs[cc]) += k(r, cc);
    }
  }
  return out;
}

std::vector<GapSample> gap_field(const model::Model& model, const Vector& q, int slave_fiber, int master_fiber,
                                 const ContactQuadrature& quadrature) {
  const SlaveCache slave(model, q, slave_fiber, quadrature);
  const MasterCache master(model, q, master_fiber);
  const double rs = model.fiber(slave_fiber).radius;
  const double rm = model.fiber(master_fiber).radius;
  std::vector<GapSample> out;
  for (int e = 0; e < static_cast<int>(slave.dofs.size()); ++e)
    for (std::size_t i = 0; i < slave.rule.size(); ++i) {
      const Vec2 p = combine(slave.shapes[i], slave.dofs[e]);
      out.push_back(make_sample(slave, e, i, p, project(p, master), rs, rm));
    }
  return out;
}

ContactProvider::ContactProvider(int slave_fiber, int master_fiber, ContactLaw law, ContactQuadrature quadrature)
    : slave_(slave_fiber), master_(master_fiber), law_(law), quadrature_(quadrature) {
  validate(law_);
  if (quadrature_.n_segments < 1 || quadrature_.n_points < 1)
    throw ValidationError("contact quadrature needs at least one segment and point", "contact.quadrature");
}

double ContactProvider::add_to(const model::Model& model, const Vector& q, Vector& residual, Matrix* tangent) const {
  ContactResult r = contact_forces(model, q, slave_, master_, law_, quadrature_, tangent != nullptr);
  residual += r.force;
  if (tangent) *tangent += r.tangent;
  return r.energy;
}

}  // namespace fiberpeel::contact
