#include "stfem/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "stfem/error.hpp"

namespace stfem {

FESpace::FESpace(std::shared_ptr<const SpacetimeMesh> mesh, int degree)
    : mesh_(std::move(mesh)), element_(degree) {
  if (!mesh_) throw Error(ErrorCode::InvalidArgument, "FESpace needs a mesh");
  const SpacetimeMesh& m = *mesh_;
  const int k = degree;
  const int nv = static_cast<int>(m.num_vertices());
  const int nf = static_cast<int>(m.num_facets());
  const int nt = static_cast<int>(m.num_triangles());
  const int per_edge = k - 1;
  const int per_cell = (k - 1) * (k - 2) / 2;
  dof_count_ = nv + per_edge * nf + per_cell * nt;

  dof_coords_.resize(dof_count_);
  for (int i = 0; i < nv; ++i) dof_coords_[i] = m.vertices()[i];
  for (int f = 0; f < nf; ++f) {
    const Point& a = m.vertices()[m.facets()[f].v[0]];
    const Point& b = m.vertices()[m.facets()[f].v[1]];
    for (int j = 0; j < per_edge; ++j) {
      const double s = static_cast<double>(j + 1) / k;
      dof_coords_[nv + per_edge * f + j] = {a.t + s * (b.t - a.t), a.x + s * (b.x - a.x)};
    }
  }

  const int n = element_.size();
  cell_dofs_.resize(static_cast<std::size_t>(nt) * n);
  for (int c = 0; c < nt; ++c) {
    const auto& v = m.triangles()[c].v;
    int* dofs = cell_dofs_.data() + static_cast<std::size_t>(c) * n;
    for (int i = 0; i < 3; ++i) dofs[i] = v[i];
    int slot = 3;
    for (int e = 0; e < 3; ++e) {
      const int f = m.tri_facets(c)[e];
      // Global edge DOFs run from the lower to the higher vertex id.
      const bool forward = v[e] == m.facets()[f].v[0];
      for (int j = 0; j < per_edge; ++j) {
        const int jj = forward ? j : per_edge - 1 - j;
        dofs[slot++] = nv + per_edge * f + jj;
      }
    }
    for (int j = 0; j < per_cell; ++j) {
      const int id = nv + per_edge * nf + per_cell * c + j;
      dofs[slot++] = id;
      const AffineMap map = AffineMap::of(m, c);
      const Vec2 p = map.to_physical(element_.nodes()[3 + 3 * per_edge + j]);
      dof_coords_[id] = {p.x(), p.y()};
    }
  }

  for (int f = 0; f < nf; ++f) {
    const Facet& facet = m.facets()[f];
    if (facet.interior()) continue;
    auto& list = boundary_dofs_[static_cast<int>(facet.tag)];
    list.push_back(facet.v[0]);
    list.push_back(facet.v[1]);
    for (int j = 0; j < per_edge; ++j) list.push_back(nv + per_edge * f + j);
  }
  for (auto& list : boundary_dofs_) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
}

const std::vector<int>& FESpace::boundary_dofs(BoundaryTag tag) const {
  return boundary_dofs_[static_cast<int>(tag)];
}

DiscreteField::DiscreteField(std::shared_ptr<const FESpace> s, Eigen::VectorXd c)
    : space(std::move(s)), coeffs(std::move(c)) {
  if (coeffs.size() != space->dof_count()) {
    throw Error(ErrorCode::InvalidArgument, "coefficient length does not match dof count");
  }
}

DiscreteField interpolate_nodal(std::shared_ptr<const FESpace> space, const SpacetimeFunction& f) {
  DiscreteField field(space);
  const auto& coords = space->dof_coords();
  for (int i = 0; i < space->dof_count(); ++i) field.coeffs(i) = f(coords[i].t, coords[i].x);
  return field;
}

DiscreteField embed(const DiscreteField& field, std::shared_ptr<const FESpace> target) {
  if (!field.space->same_mesh(*target)) {
    throw Error(ErrorCode::MeshMismatch, "embed requires spaces on the same mesh");
  }
  DiscreteField out(target);
  const ReferenceElement& src_el = field.space->element();
  const ReferenceElement& dst_el = target->element();
  BasisEval b;
  const int nt = static_cast<int>(target->mesh().num_triangles());
  for (int c = 0; c < nt; ++c) {
    const auto src = field.space->cell_dofs(c);
    const auto dst = target->cell_dofs(c);
    for (int i = 0; i < dst_el.size(); ++i) {
      src_el.eval(dst_el.nodes()[i], b, false);
      double v = 0.0;
      for (int j = 0; j < src_el.size(); ++j) v += b.value[j] * field.coeffs(src[j]);
      out.coeffs(dst[i]) = v;
    }
  }
  return out;
}

std::optional<int> locate(const SpacetimeMesh& mesh, Point p) {
  const double tol = 1e-12;
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const AffineMap map = AffineMap::of(mesh, static_cast<int>(c));
    const Vec2 r = map.to_reference(Vec2(p.t, p.x));
    if (r.x() >= -tol && r.y() >= -tol && r.x() + r.y() <= 1.0 + tol) return static_cast<int>(c);
  }
  return std::nullopt;
}

FieldSample eval_on_cell(const DiscreteField& field, int tri, Point p) {
  const FESpace& space = *field.space;
  const AffineMap map = AffineMap::of(space.mesh(), tri);
  BasisEval b;
  space.element().eval(map.to_reference(Vec2(p.t, p.x)), b, false);
  push_forward(map, b, false);
  FieldSample s;
  const auto dofs = space.cell_dofs(tri);
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    s.value += field.coeffs(dofs[i]) * b.value[i];
    s.grad += field.coeffs(dofs[i]) * b.grad[i];
  }
  return s;
}

FieldSample eval_field(const DiscreteField& field, Point p) {
  const auto tri = locate(field.space->mesh(), p);
  if (!tri) {
    throw Error(ErrorCode::OutOfDomain,
                "point (" + std::to_string(p.t) + "," + std::to_string(p.x) + ") is outside the mesh");
  }
  return eval_on_cell(field, *tri, p);
}

void write_field_csv(std::ostream& os, const DiscreteField& field) {
  os << "dof_id,t,x,value\n" << std::setprecision(17);
  const auto& coords = field.space->dof_coords();
  for (int i = 0; i < field.space->dof_count(); ++i) {
    os << i << ',' << coords[i].t << ',' << coords[i].x << ',' << field.coeffs(i) << '\n';
  }
}

}  // namespace stfem
