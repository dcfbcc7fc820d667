#pragma once

// Shared fixtures and independent quadrature oracles for the unit tests.

#include <cmath>
#include <functional>
#include <memory>
#include <random>

#include "stfem/stfem.hpp"

namespace stfem::testing {

inline std::shared_ptr<const SpacetimeMesh> mesh_of(int nx, int nt, double T = 2.0,
                                                    Interval omega = {0.0, 1.0},
                                                    SplitPattern pattern = SplitPattern::Crisscross) {
  return std::make_shared<const SpacetimeMesh>(build_structured(nx, nt, T, omega, pattern));
}

inline std::shared_ptr<const FESpace> space_of(std::shared_ptr<const SpacetimeMesh> m, int k) {
  return std::make_shared<const FESpace>(std::move(m), k);
}

inline DiscreteField random_field(const std::shared_ptr<const FESpace>& s, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> N;
  DiscreteField f(s);
  for (int i = 0; i < s->dof_count(); ++i) f.coeffs(i) = N(rng);
  return f;
}

/// Integral over M of g(cell, point, value, grad) with a fresh degree-`deg`
/// rule, using only eval_on_cell.
inline double integrate_cells(const DiscreteField& u, int deg,
                              const std::function<double(int, Point, const FieldSample&)>& g) {
  const auto& mesh = u.space->mesh();
  const auto& rule = quadrature_for(deg);
  double s = 0.0;
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const int ci = static_cast<int>(c);
    const AffineMap map = AffineMap::of(mesh, ci);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 p = map.to_physical(Vec2(rule.points[q][0], rule.points[q][1]));
      const Point pt{p.x(), p.y()};
      s += rule.weights[q] * std::abs(map.det) * g(ci, pt, eval_on_cell(u, ci, pt));
    }
  }
  return s;
}

/// Integral over boundary facets carrying one of the selected tags.
inline double integrate_boundary(const DiscreteField& u, int deg, std::initializer_list<BoundaryTag> tags,
                                 const std::function<double(const Facet&, Point, const FieldSample&)>& g) {
  const auto& mesh = u.space->mesh();
  const auto& line = line_rule_for(deg);
  double s = 0.0;
  for (const auto& f : mesh.facets()) {
    if (f.interior()) continue;
    bool want = false;
    for (auto t : tags) want |= f.tag == t;
    if (!want) continue;
    const Point& a = mesh.vertices()[f.v[0]];
    const Point& b = mesh.vertices()[f.v[1]];
    for (std::size_t q = 0; q < line.size(); ++q) {
      const double r = line.points[q];
      const Point p{a.t + r * (b.t - a.t), a.x + r * (b.x - a.x)};
      s += line.weights[q] * f.length * g(f, p, eval_on_cell(u, f.tri[0], p));
    }
  }
  return s;
}

inline double sq(double v) { return v * v; }

inline double h1_norm(const DiscreteField& u) {
  return std::sqrt(integrate_cells(u, 2 * u.space->degree() + 2, [](int, Point, const FieldSample& s) {
    return sq(s.value) + s.grad.squaredNorm();
  }));
}

}  // namespace stfem::testing
