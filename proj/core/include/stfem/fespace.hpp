#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "stfem/mesh.hpp"

namespace stfem {

/// Spacetime vectors are ordered (t, x), matching the gradient (d_t, d_x).
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Basis values, gradients and Hessians at one point.
struct BasisEval {
  std::vector<double> value;
  std::vector<Vec2> grad;
  std::vector<Mat2> hess;

  void resize(std::size_t n) {
    value.resize(n);
    grad.resize(n);
    hess.resize(n);
  }
};

/// Nodal Lagrange element of degree k in {1,2,3} on the reference triangle
/// with vertices (0,0), (1,0), (0,1).
///
/// Node order: the three vertices, then k-1 equispaced nodes per edge
/// (edge e runs from vertex e to vertex (e+1)%3), then interior nodes.
class ReferenceElement {
public:
  explicit ReferenceElement(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }

  /// Values and reference-coordinate derivatives; Hessians only if requested.
  void eval(const Vec2& ref, BasisEval& out, bool with_hessian = true) const;

private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // column i holds the monomial coefficients of basis i
};

/// Number of nodes of the degree-k element, (k+1)(k+2)/2.
constexpr int lagrange_size(int k) { return (k + 1) * (k + 2) / 2; }

/// x = origin + jac * ref.
struct AffineMap {
  Vec2 origin;
  Mat2 jac;
  Mat2 jac_inv;
  double det = 0.0;

  static AffineMap of(const SpacetimeMesh& mesh, int tri);
  Vec2 to_physical(const Vec2& ref) const { return origin + jac * ref; }
  Vec2 to_reference(const Vec2& phys) const { return jac_inv * (phys - origin); }
};

/// Transform reference derivatives in `eval` to physical (t,x) derivatives.
void push_forward(const AffineMap& map, BasisEval& eval, bool with_hessian = true);

/// Continuous Lagrange space V_h^k on a spacetime mesh.
class FESpace {
public:
  FESpace(std::shared_ptr<const SpacetimeMesh> mesh, int degree);

  const SpacetimeMesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const SpacetimeMesh>& mesh_ptr() const { return mesh_; }
  int degree() const { return element_.degree(); }
  const ReferenceElement& element() const { return element_; }
  int dofs_per_cell() const { return element_.size(); }
  int dof_count() const { return dof_count_; }

  std::span<const int> cell_dofs(int tri) const {
    return {cell_dofs_.data() + static_cast<std::size_t>(tri) * element_.size(),
            static_cast<std::size_t>(element_.size())};
  }
  const std::vector<Point>& dof_coords() const { return dof_coords_; }
  /// Sorted DOFs lying on boundary facets with the given tag.
  const std::vector<int>& boundary_dofs(BoundaryTag tag) const;

  bool same_mesh(const FESpace& other) const { return mesh_ == other.mesh_; }

private:
  std::shared_ptr<const SpacetimeMesh> mesh_;
  ReferenceElement element_;
  int dof_count_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<Point> dof_coords_;
  std::array<std::vector<int>, 4> boundary_dofs_;
};

/// Coefficient vector over an FESpace.
struct DiscreteField {
  std::shared_ptr<const FESpace> space;
  Eigen::VectorXd coeffs;

  DiscreteField() = default;
  explicit DiscreteField(std::shared_ptr<const FESpace> s)
      : space(std::move(s)), coeffs(Eigen::VectorXd::Zero(space->dof_count())) {}
  DiscreteField(std::shared_ptr<const FESpace> s, Eigen::VectorXd c);
};

using SpacetimeFunction = std::function<double(double t, double x)>;

/// Lagrange interpolation: the coefficient of each DOF is f at its node.
DiscreteField interpolate_nodal(std::shared_ptr<const FESpace> space, const SpacetimeFunction& f);

/// Re-express `field` in `target` (same mesh). Exact when target's degree is
/// at least the field's degree.
DiscreteField embed(const DiscreteField& field, std::shared_ptr<const FESpace> target);

struct FieldSample {
  double value = 0.0;
  Vec2 grad = Vec2::Zero();  // (d_t, d_x)
};

/// Index of a triangle containing p (brute-force scan), or nullopt.
std::optional<int> locate(const SpacetimeMesh& mesh, Point p);

/// Value and spacetime gradient at p. Throws OutOfDomain if p is outside M.
FieldSample eval_field(const DiscreteField& field, Point p);

/// Evaluate on a given triangle at a physical point (no containment check).
FieldSample eval_on_cell(const DiscreteField& field, int tri, Point p);

/// Write "dof_id,t,x,value" rows.
void write_field_csv(std::ostream& os, const DiscreteField& field);

}  // namespace stfem
