#pragma once

// Symmetric forms written as weighted sums of squared linear functionals
// sampled at quadrature points: s(u,u) = sum_r w_r (g_r . u)^2. The same
// samples drive global assembly, per-triangle indicators and error norms
// against an exact solution, so these stay consistent by construction.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "local.hpp"
#include "stfem/forms.hpp"

namespace stfem::detail {

struct SquareRecipe {
  double value_volume = 0.0;
  double grad_volume = 0.0;
  double box_volume = 0.0;
  std::array<double, 4> boundary_value{};  // indexed by BoundaryTag
  std::array<double, 4> boundary_dt{};
  std::array<double, 4> boundary_dx{};
  double jump_grad = 0.0;
  double jump_box = 0.0;

  bool any_volume() const { return value_volume != 0.0 || grad_volume != 0.0 || box_volume != 0.0; }
  bool any_boundary() const {
    for (int i = 0; i < 4; ++i) {
      if (boundary_value[i] != 0.0 || boundary_dt[i] != 0.0 || boundary_dx[i] != 0.0) return true;
    }
    return false;
  }
  bool any_facet() const { return jump_grad != 0.0 || jump_box != 0.0; }
  bool needs_hessian() const { return box_volume != 0.0 || jump_box != 0.0; }
};

enum class SampleKind { Value, Dt, Dx, Box, JumpGrad, JumpBox };

/// Jet of an exact solution at a point.
inline double exact_sample(SampleKind kind, const Jet& j) {
  switch (kind) {
    case SampleKind::Value: return j.u;
    case SampleKind::Dt: return j.ut;
    case SampleKind::Dx: return j.ux;
    case SampleKind::Box: return j.utt - j.uxx;
    default: return 0.0;  // smooth functions have no jumps
  }
}

SquareRecipe primal_recipe(PrimalStab variant, double h);
SquareRecipe dual_recipe(DualStab variant, double h);

class SquareEngine {
public:
  SquareEngine(const FESpace& space, const SquareRecipe& recipe, const QuadratureOptions& quad = {});

  const FESpace& space() const { return space_; }
  const SquareRecipe& recipe() const { return recipe_; }

  /// Volume and boundary samples of triangle c. `fn(dofs, g, weight, kind, point)`.
  template <class Fn>
  void cell(int c, Fn&& fn) const;

  /// Jump samples of interior facet f over the concatenated dofs of both sides.
  template <class Fn>
  void facet(int f, Fn&& fn) const;

private:
  const FESpace& space_;
  SquareRecipe recipe_;
  CellTables tables_;
};

/// Global matrix of the recipe, restricted to cells with mask[c] != 0 for the
/// volume terms (empty mask selects all cells).
SparseMatrix assemble_squares(const FESpace& space, const SquareRecipe& recipe,
                              const std::vector<char>& mask = {}, const QuadratureOptions& quad = {},
                              int threads = 0);

/// Per-triangle sum of w (g.u - exact)^2; facet samples split half-half.
std::vector<double> local_squares(const DiscreteField& field, const SquareRecipe& recipe,
                                  const std::vector<char>& mask = {},
                                  const QuadratureOptions& quad = {},
                                  const JetFunction* exact = nullptr);

/// sum_r w_r (g_r . u)^2 over every sample of the mesh in one pass, facet
/// samples counted once. Avoids the cancellation of u^T S u when s(u,u) is
/// small compared with ||S|| ||u||^2.
double global_squares(const DiscreteField& field, const SquareRecipe& recipe,
                      const QuadratureOptions& quad = {});

// ---------------------------------------------------------------------------

inline SquareEngine::SquareEngine(const FESpace& space, const SquareRecipe& recipe,
                                  const QuadratureOptions& quad)
    : space_(space), recipe_(recipe) {
  const int k = space.degree();
  const int vdeg = quad.volume > 0 ? quad.volume : 2 * k + 2;
  const int fdeg = quad.facet > 0 ? quad.facet : 2 * k + 2;
  tables_ = make_tables(space.element(), quadrature_for(vdeg), line_rule_for(fdeg),
                        recipe.needs_hessian());
}

template <class Fn>
void SquareEngine::cell(int c, Fn&& fn) const {
  const SpacetimeMesh& mesh = space_.mesh();
  const AffineMap map = AffineMap::of(mesh, c);
  const auto dofs = space_.cell_dofs(c);
  const std::size_t n = dofs.size();
  const bool hess = recipe_.box_volume != 0.0;
  BasisEval be;
  std::vector<double> g(n);

  if (recipe_.any_volume()) {
    const QuadratureRule& rule = *tables_.rule;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      to_physical(map, tables_.vol[q], be, hess);
      const double w = rule.weights[q] * std::abs(map.det);
      const Vec2 p = map.to_physical(Vec2(rule.points[q][0], rule.points[q][1]));
      const Point pt{p.x(), p.y()};
      if (recipe_.value_volume != 0.0) {
        fn(dofs, be.value.data(), w * recipe_.value_volume, SampleKind::Value, pt);
      }
      if (recipe_.grad_volume != 0.0) {
        for (std::size_t i = 0; i < n; ++i) g[i] = be.grad[i].x();
        fn(dofs, g.data(), w * recipe_.grad_volume, SampleKind::Dt, pt);
        for (std::size_t i = 0; i < n; ++i) g[i] = be.grad[i].y();
        fn(dofs, g.data(), w * recipe_.grad_volume, SampleKind::Dx, pt);
      }
      if (hess) {
        for (std::size_t i = 0; i < n; ++i) g[i] = box(be.hess[i]);
        fn(dofs, g.data(), w * recipe_.box_volume, SampleKind::Box, pt);
      }
    }
  }

  if (!recipe_.any_boundary()) return;
  const LineRule& line = *tables_.line;
  for (int e = 0; e < 3; ++e) {
    const Facet& f = mesh.facets()[mesh.tri_facets(c)[e]];
    if (f.interior()) continue;
    const int tag = static_cast<int>(f.tag);
    const double wv = recipe_.boundary_value[tag];
    const double wd = recipe_.boundary_dt[tag];
    const double wx = recipe_.boundary_dx[tag];
    if (wv == 0.0 && wd == 0.0 && wx == 0.0) continue;
    const auto& tab = tables_.edge[edge_table_index(mesh, c, e, f)];
    const Point& a = mesh.vertices()[f.v[0]];
    const Point& b = mesh.vertices()[f.v[1]];
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const double w = line.weights[q] * f.length;
      const Point pt{a.t + s * (b.t - a.t), a.x + s * (b.x - a.x)};
      to_physical(map, tab[q], be, false);
      if (wv != 0.0) fn(dofs, be.value.data(), w * wv, SampleKind::Value, pt);
      if (wd != 0.0) {
        for (std::size_t i = 0; i < n; ++i) g[i] = be.grad[i].x();
        fn(dofs, g.data(), w * wd, SampleKind::Dt, pt);
      }
      if (wx != 0.0) {
        for (std::size_t i = 0; i < n; ++i) g[i] = be.grad[i].y();
        fn(dofs, g.data(), w * wx, SampleKind::Dx, pt);
      }
    }
  }
}

template <class Fn>
void SquareEngine::facet(int fid, Fn&& fn) const {
  const SpacetimeMesh& mesh = space_.mesh();
  const Facet& f = mesh.facets()[fid];
  const int c1 = f.tri[0];
  const int c2 = f.tri[1];
  const AffineMap m1 = AffineMap::of(mesh, c1);
  const AffineMap m2 = AffineMap::of(mesh, c2);
  const auto d1 = space_.cell_dofs(c1);
  const auto d2 = space_.cell_dofs(c2);
  const std::size_t n = d1.size();
  std::vector<int> dofs(2 * n);
  std::copy(d1.begin(), d1.end(), dofs.begin());
  std::copy(d2.begin(), d2.end(), dofs.begin() + static_cast<std::ptrdiff_t>(n));
  const std::span<const int> all(dofs);

  const auto& t1 = tables_.edge[edge_table_index(mesh, c1, f.local_edge[0], f)];
  const auto& t2 = tables_.edge[edge_table_index(mesh, c2, f.local_edge[1], f)];
  const Vec2 n1(f.normal.t, f.normal.x);
  const bool hess = recipe_.jump_box != 0.0;
  const Point& a = mesh.vertices()[f.v[0]];
  const Point& b = mesh.vertices()[f.v[1]];
  const LineRule& line = *tables_.line;
  BasisEval b1, b2;
  std::vector<double> g(2 * n);
  for (std::size_t q = 0; q < line.size(); ++q) {
    const double s = line.points[q];
    const double w = line.weights[q] * f.length;
    const Point pt{a.t + s * (b.t - a.t), a.x + s * (b.x - a.x)};
    to_physical(m1, t1[q], b1, hess);
    to_physical(m2, t2[q], b2, hess);
    if (recipe_.jump_grad != 0.0) {
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = n1.dot(minkowski(b1.grad[i]));
        g[n + i] = -n1.dot(minkowski(b2.grad[i]));
      }
      fn(all, g.data(), w * recipe_.jump_grad, SampleKind::JumpGrad, pt);
    }
    if (hess) {
      for (std::size_t i = 0; i < n; ++i) {
        g[i] = box(b1.hess[i]);
        g[n + i] = -box(b2.hess[i]);
      }
      fn(all, g.data(), w * recipe_.jump_box, SampleKind::JumpBox, pt);
    }
  }
}

}  // namespace stfem::detail
