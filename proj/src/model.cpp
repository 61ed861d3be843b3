#include "fiberpeel/model.hpp"

#include <cmath>
#include <stdexcept>

#include "fiberpeel/errors.hpp"

namespace fiberpeel::model {

FiberMesh make_straight_fiber(const Vec2& start, const Vec2& direction, double length, double radius,
                              double youngs_modulus, double poisson_ratio, int n_elements) {
  if (!(length > 0.0)) throw ValidationError("fiber length must be positive", "fiber.length");
  if (!(radius > 0.0)) throw ValidationError("fiber radius must be positive", "fiber.radius");
  if (!(youngs_modulus > 0.0)) throw ValidationError("Young's modulus must be positive", "fiber.youngs_modulus");
  if (n_elements < 1) throw ValidationError("need at least one element", "fiber.n_elements");
  FiberMesh mesh;
  mesh.length = length;
  mesh.radius = radius;
  mesh.youngs_modulus = youngs_modulus;
  mesh.poisson_ratio = poisson_ratio;
  mesh.n_elements = n_elements;
  const Vec2 t = direction.normalized();
  for (int i = 0; i <= n_elements; ++i) {
    mesh.ref_positions.push_back(start + t * (length * i / n_elements));
    mesh.ref_tangents.push_back(t);
  }
  return mesh;
}

std::string to_string(Branch branch) {
  switch (branch) {
    case Branch::Contact: return "contact";
    case Branch::Separated: return "separated";
    case Branch::Unstable: return "unstable";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

DofMap::DofMap(std::vector<int> nodes_per_fiber) : nodes_per_fiber_(std::move(nodes_per_fiber)) {
  std::size_t offset = 0;
  for (int n : nodes_per_fiber_) {
    node_offset_.push_back(offset);
    offset += static_cast<std::size_t>(n) * kDofsPerNode;
  }
  kinds_.assign(offset, DofKind::Free);
  rebuild();
}

std::size_t DofMap::index(int fiber, int node, Component c) const {
  if (node < 0 || node >= nodes_per_fiber_.at(fiber)) throw std::out_of_range("node index out of range");
  return node_offset_[fiber] + static_cast<std::size_t>(node) * kDofsPerNode + static_cast<std::size_t>(c);
}

std::array<std::size_t, 8> DofMap::element_dofs(int fiber, int element) const {
  const std::size_t first = index(fiber, element, Component::X);
  std::array<std::size_t, 8> out{};
  for (std::size_t k = 0; k < 8; ++k) out[k] = first + k;
  return out;
}

void DofMap::fix(std::size_t dof) {
  kinds_.at(dof) = DofKind::Fixed;
  rebuild();
}

void DofMap::drive(std::size_t dof) {
  kinds_.at(dof) = DofKind::Driven;
  rebuild();
}

void DofMap::release(std::size_t dof) {
  kinds_.at(dof) = DofKind::Free;
  rebuild();
}

void DofMap::rebuild() {
  free_.clear();
  fixed_.clear();
  driven_.clear();
  free_pos_.assign(kinds_.size(), -1);
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    switch (kinds_[i]) {
      case DofKind::Free:
        free_pos_[i] = static_cast<std::ptrdiff_t>(free_.size());
        free_.push_back(i);
        break;
      case DofKind::Fixed: fixed_.push_back(i); break;
      case DofKind::Driven: driven_.push_back(i); break;
    }
  }
}

// ---------------------------------------------------------------------------

double BeamProvider::add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const {
  double energy = 0.0;
  for (int f = 0; f < static_cast<int>(model.fibers().size()); ++f) {
    const beam::HermiteElement element = model.fiber(f).element();
    for (int e = 0; e < model.fiber(f).n_elements; ++e) {
      const auto dofs = model.dofs().element_dofs(f, e);
      const beam::ElementResponse r = beam::element_energy_force_tangent(element, model.element_dofs(q, f, e));
      energy += r.energy;
      for (int i = 0; i < 8; ++i) {
        residual[dofs[i]] += r.force[i];
        if (tangent)
          for (int j = 0; j < 8; ++j) (*tangent)(dofs[i], dofs[j]) += r.tangent(i, j);
      }
    }
  }
  return energy;
}

double PointLoad::add_to(const Model&, const Vector& q, Vector& residual, Matrix*) const {
  residual[dof_] -= magnitude_;
  return -magnitude_ * q[dof_];
}

double EndMoment::add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const {
  const std::size_t ix = model.dofs().index(fiber_, node_, Component::TX);
  const Vec2 t(q[ix], q[ix + 1]);
  const double s = t.squaredNorm();
  const Vec2 v(-t.y(), t.x());
  residual.segment<2>(ix) -= moment_ * v / s;
  if (tangent) {
    Mat2 dv;
    dv << 0.0, -1.0, 1.0, 0.0;
    tangent->block<2, 2>(ix, ix) -= moment_ * (dv / s - 2.0 * v * t.transpose() / (s * s));
  }
  return -moment_ * std::atan2(t.y(), t.x());
}

// ---------------------------------------------------------------------------

Model::Model(std::vector<FiberMesh> fibers) : fibers_(std::move(fibers)) {
  std::vector<int> nodes;
  for (const auto& f : fibers_) nodes.push_back(f.n_nodes());
  dofs_ = DofMap(nodes);
  reference_ = Vector::Zero(static_cast<Eigen::Index>(dofs_.size()));
  for (int f = 0; f < static_cast<int>(fibers_.size()); ++f)
    for (int n = 0; n < fibers_[f].n_nodes(); ++n) {
      const std::size_t i = dofs_.index(f, n, Component::X);
      reference_.segment<2>(i) = fibers_[f].ref_positions[n];
      reference_.segment<2>(i + 2) = fibers_[f].ref_tangents[n];
    }
}

Vec8 Model::element_dofs(const Vector& q, int fiber, int element) const {
  return q.segment<8>(static_cast<Eigen::Index>(dofs_.index(fiber, element, Component::X)));
}

Vec2 Model::node_position(const Vector& q, int fiber, int node) const {
  return q.segment<2>(static_cast<Eigen::Index>(dofs_.index(fiber, node, Component::X)));
}

Assembly Model::assemble(const Vector& q, bool with_tangent) const {
  const auto n = static_cast<Eigen::Index>(dofs_.size());
  Assembly out;
  out.residual = Vector::Zero(n);
  if (with_tangent) out.tangent = Matrix::Zero(n, n);
  for (const auto& provider : providers_) {
    out.energy += provider->add_to(*this, q, out.residual, with_tangent ? &out.tangent : nullptr);
    if (!out.residual.allFinite()) throw NonFiniteError(provider->name(), "residual");
  }
  if (with_tangent && !out.tangent.allFinite()) throw NonFiniteError("assembly", "tangent");
  if (!std::isfinite(out.energy)) throw NonFiniteError("assembly", "energy");
  return out;
}

void Model::apply_prescribed(SystemState& state) const {
  for (std::size_t d : dofs_.fixed_dofs()) state.q[d] = reference_[d];
  for (std::size_t d : dofs_.driven_dofs()) state.q[d] = reference_[d] + state.u_x;
}

SystemState Model::reference_state() const {
  SystemState s;
  s.q = reference_;
  apply_prescribed(s);
  return s;
}

ReactionSet Model::reactions_from_residual(const Vector& residual) const {
  ReactionSet set;
  for (int f = 0; f < dofs_.n_fibers(); ++f)
    for (int n = 0; n < dofs_.n_nodes(f); ++n) {
      const std::size_t ix = dofs_.index(f, n, Component::X);
      const bool cx = dofs_.kind(ix) != DofKind::Free;
      const bool cy = dofs_.kind(ix + 1) != DofKind::Free;
      if (!cx && !cy) continue;
      SupportReaction r;
      r.fiber = f;
      r.node = n;
      r.force = Vec2(cx ? residual[ix] : 0.0, cy ? residual[ix + 1] : 0.0);
      set.supports.push_back(r);
      if (dofs_.kind(ix) == DofKind::Driven) set.total_fx += residual[ix];
    }
  return set;
}

ReactionSet Model::extract_reactions(const SystemState& state) const {
  return reactions_from_residual(assemble(state.q, false).residual);
}

Vector Model::restrict_vector(const Vector& full) const {
  const auto& free = dofs_.free_dofs();
  Vector out(static_cast<Eigen::Index>(free.size()));
  for (std::size_t i = 0; i < free.size(); ++i) out[i] = full[free[i]];
  return out;
}

Matrix Model::restrict_matrix(const Matrix& full) const {
  const auto& free = dofs_.free_dofs();
  const auto n = static_cast<Eigen::Index>(free.size());
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = full(free[i], free[j]);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void constrain_supports(Model& model, int fiber, SupportType supports, bool driven) {
  DofMap& dofs = model.dofs();
  const int last = model.fiber(fiber).n_nodes() - 1;
  const auto set_x = [&](int node) {
    const std::size_t d = dofs.index(fiber, node, Component::X);
    driven ? dofs.drive(d) : dofs.fix(d);
  };
  set_x(0);
  set_x(last);
  dofs.fix(dofs.index(fiber, 0, Component::Y));
  if (supports == SupportType::PinPin) dofs.fix(dofs.index(fiber, last, Component::Y));
}

}  // namespace

TwoFiberSystem build_two_fiber_model(const TwoFiberSpec& spec) {
  if (spec.midpoint_node_required && spec.n_elements % 2 != 0)
    throw ValidationError("midpoint load requires an even number of elements", "fiber.n_elements");
  if (!(spec.separation > 0.0)) throw ValidationError("initial separation must be positive", "geometry.separation");
  const Vec2 up(0.0, 1.0);
  std::vector<FiberMesh> fibers{
      make_straight_fiber(Vec2(0.0, 0.0), up, spec.length, spec.radius, spec.youngs_modulus, spec.poisson_ratio,
                          spec.n_elements),
      make_straight_fiber(Vec2(spec.separation, 0.0), up, spec.length, spec.radius, spec.youngs_modulus,
                          spec.poisson_ratio, spec.n_elements)};
  TwoFiberSystem sys{Model(std::move(fibers)), {}};
  constrain_supports(sys.model, 0, spec.supports, false);
  constrain_supports(sys.model, 1, spec.supports, true);
  sys.model.add_provider(std::make_shared<BeamProvider>());
  sys.state = sys.model.reference_state();
  return sys;
}

TwoFiberSystem build_single_fiber_model(const FiberMesh& mesh, SupportType supports) {
  TwoFiberSystem sys{Model({mesh}), {}};
  constrain_supports(sys.model, 0, supports, false);
  sys.model.add_provider(std::make_shared<BeamProvider>());
  sys.state = sys.model.reference_state();
  return sys;
}

}  // namespace fiberpeel::model
