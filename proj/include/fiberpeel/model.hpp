#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fiberpeel/beam.hpp"
#include "fiberpeel/types.hpp"

namespace fiberpeel::model {

/// Geometry, discretization and material of one straight fiber.
struct FiberMesh {
  double length = 0.0;
  double radius = 0.0;
  double youngs_modulus = 0.0;
  double poisson_ratio = 0.0;  // carried along, the planar shear-rigid beam does not use it
  int n_elements = 0;
  std::vector<Vec2> ref_positions;
  std::vector<Vec2> ref_tangents;

  int n_nodes() const noexcept { return n_elements + 1; }
  double area() const noexcept { return kPi * radius * radius; }
  double second_moment() const noexcept { return 0.25 * kPi * radius * radius * radius * radius; }
  double slenderness() const noexcept { return length / radius; }
  double element_length() const noexcept { return length / n_elements; }
  beam::HermiteElement element() const noexcept {
    return {element_length(), youngs_modulus * area(), youngs_modulus * second_moment()};
  }
};

/// Uniformly meshed straight fiber from `start` along unit vector `direction`.
FiberMesh make_straight_fiber(const Vec2& start, const Vec2& direction, double length, double radius,
                              double youngs_modulus, double poisson_ratio, int n_elements);

enum class Component : int { X = 0, Y = 1, TX = 2, TY = 3 };
enum class DofKind : std::uint8_t { Free, Fixed, Driven };

inline constexpr int kDofsPerNode = 4;

/// Global DOF numbering: fibers in order, nodes in order, (x, y, tx, ty) per node.
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(std::vector<int> nodes_per_fiber);

  std::size_t size() const noexcept { return kinds_.size(); }
  int n_fibers() const noexcept { return static_cast<int>(node_offset_.size()); }
  int n_nodes(int fiber) const { return nodes_per_fiber_.at(fiber); }

  std::size_t index(int fiber, int node, Component c) const;
  std::array<std::size_t, 8> element_dofs(int fiber, int element) const;

  void fix(std::size_t dof);
  void drive(std::size_t dof);
  void release(std::size_t dof);
  DofKind kind(std::size_t dof) const { return kinds_.at(dof); }
  static bool is_translational(std::size_t dof) noexcept { return dof % kDofsPerNode < 2; }

  const std::vector<std::size_t>& free_dofs() const noexcept { return free_; }
  const std::vector<std::size_t>& fixed_dofs() const noexcept { return fixed_; }
  const std::vector<std::size_t>& driven_dofs() const noexcept { return driven_; }
  /// Position of `dof` within free_dofs(), or -1 for constrained DOFs.
  std::ptrdiff_t free_position(std::size_t dof) const { return free_pos_.at(dof); }

 private:
  void rebuild();

  std::vector<int> nodes_per_fiber_;
  std::vector<std::size_t> node_offset_;
  std::vector<DofKind> kinds_;
  std::vector<std::size_t> free_, fixed_, driven_;
  std::vector<std::ptrdiff_t> free_pos_;
};

enum class Branch { Contact, Separated, Unstable };

std::string to_string(Branch branch);

/// Global unknowns plus the prescribed support displacement.
struct SystemState {
  Vector q;
  double u_x = 0.0;
  Branch branch = Branch::Contact;
};

struct SupportReaction {
  int fiber = 0;
  int node = 0;
  Vec2 force = Vec2::Zero();
};

struct ReactionSet {
  std::vector<SupportReaction> supports;
  double total_fx = 0.0;  // sum of x-reactions at driven supports
};

class Model;

/// A contribution to the total potential: adds its gradient to `residual` and its
/// Hessian to `tangent` (when non-null), returns its energy.
class ForceProvider {
 public:
  virtual ~ForceProvider() = default;
  virtual std::string name() const = 0;
  virtual double add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const = 0;
};

/// Internal elastic energy of every fiber.
class BeamProvider final : public ForceProvider {
 public:
  std::string name() const override { return "beam"; }
  double add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const override;
};

/// Dead load on a single DOF.
class PointLoad final : public ForceProvider {
 public:
  PointLoad(std::size_t dof, double magnitude) : dof_(dof), magnitude_(magnitude) {}
  std::string name() const override { return "point_load"; }
  double add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const override;
  void set_magnitude(double magnitude) noexcept { magnitude_ = magnitude; }
  double magnitude() const noexcept { return magnitude_; }
  std::size_t dof() const noexcept { return dof_; }

 private:
  std::size_t dof_;
  double magnitude_;
};

/// Conservative end moment M acting on the tangent direction angle of one node.
class EndMoment final : public ForceProvider {
 public:
  EndMoment(int fiber, int node, double moment) : fiber_(fiber), node_(node), moment_(moment) {}
  std::string name() const override { return "end_moment"; }
  double add_to(const Model& model, const Vector& q, Vector& residual, Matrix* tangent) const override;
  void set_moment(double moment) noexcept { moment_ = moment; }

 private:
  int fiber_;
  int node_;
  double moment_;
};

struct Assembly {
  double energy = 0.0;
  Vector residual;  // dPi/dq over all DOFs
  Matrix tangent;   // d residual / dq over all DOFs (empty if not requested)
};

class Model {
 public:
  Model() = default;
  explicit Model(std::vector<FiberMesh> fibers);

  const std::vector<FiberMesh>& fibers() const noexcept { return fibers_; }
  const FiberMesh& fiber(int i) const { return fibers_.at(i); }
  DofMap& dofs() noexcept { return dofs_; }
  const DofMap& dofs() const noexcept { return dofs_; }
  const Vector& reference() const noexcept { return reference_; }

  void add_provider(std::shared_ptr<ForceProvider> provider) { providers_.push_back(std::move(provider)); }
  const std::vector<std::shared_ptr<ForceProvider>>& providers() const noexcept { return providers_; }

  Vec8 element_dofs(const Vector& q, int fiber, int element) const;
  /// Current position of a node.
  Vec2 node_position(const Vector& q, int fiber, int node) const;

  /// Sums all providers; throws NonFiniteError naming the first provider that yields NaN/inf.
  Assembly assemble(const Vector& q, bool with_tangent) const;

  /// Sets fixed DOFs to their reference value and driven DOFs to reference + u_x.
  void apply_prescribed(SystemState& state) const;
  SystemState reference_state() const;

  ReactionSet extract_reactions(const SystemState& state) const;
  ReactionSet reactions_from_residual(const Vector& residual) const;

  Vector restrict_vector(const Vector& full) const;
  Matrix restrict_matrix(const Matrix& full) const;

 private:
  std::vector<FiberMesh> fibers_;
  DofMap dofs_;
  Vector reference_;
  std::vector<std::shared_ptr<ForceProvider>> providers_;
};

enum class SupportType { PinRoller, PinPin };

/// Input of the two-fiber builder; the scenario layer fills it from a config.
struct TwoFiberSpec {
  double length = 5.0;
  double radius = 0.02;
  double youngs_modulus = 1e5;
  double poisson_ratio = 0.3;
  int n_elements = 16;
  double separation = 0.04;  // initial inter-axis distance d0
  SupportType supports = SupportType::PinRoller;
  bool midpoint_node_required = false;
};

struct TwoFiberSystem {
  Model model;
  SystemState state;
};

/// Left fiber at x = 0, right fiber at x = d0, both along +y; right-fiber endpoint
/// x DOFs are driven. Only the beam provider is registered.
TwoFiberSystem build_two_fiber_model(const TwoFiberSpec& spec);

/// One fiber along +y from the origin with the given supports and the beam provider.
TwoFiberSystem build_single_fiber_model(const FiberMesh& mesh, SupportType supports);

}  // namespace fiberpeel::model
