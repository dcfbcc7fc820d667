#include "stfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "stfem/error.hpp"

namespace stfem {

namespace {

constexpr double kGeomTol = 1e-12;

double dist(const Point& a, const Point& b) { return std::hypot(a.t - b.t, a.x - b.x); }

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.t - a.t) * (c.x - a.x) - (b.x - a.x) * (c.t - a.t));
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

BoundaryTag tag_boundary_edge(const Point& a, const Point& b, double T) {
  const double tol = kGeomTol * std::max(1.0, T);
  if (std::abs(a.t) <= tol && std::abs(b.t) <= tol) return BoundaryTag::Initial;
  if (std::abs(a.t - T) <= tol && std::abs(b.t - T) <= tol) return BoundaryTag::Final;
  if (std::abs(a.x) <= tol && std::abs(b.x) <= tol) return BoundaryTag::Sigma;
  if (std::abs(a.x - 1.0) <= tol && std::abs(b.x - 1.0) <= tol) return BoundaryTag::Sigma;
  return BoundaryTag::Interior;
}

}  // namespace

FacetTable classify_facets(std::span<const Point> vertices,
                           std::span<const std::array<int, 3>> triangles,
                           double T_final) {
  FacetTable table;
  table.tri_facets.resize(triangles.size());
  std::unordered_map<std::uint64_t, int> lookup;
  lookup.reserve(triangles.size() * 2);

  for (std::size_t k = 0; k < triangles.size(); ++k) {
    const auto& tri = triangles[k];
    for (int e = 0; e < 3; ++e) {
      const int a = tri[e];
      const int b = tri[(e + 1) % 3];
      auto [it, inserted] = lookup.try_emplace(edge_key(a, b), static_cast<int>(table.facets.size()));
      if (inserted) {
        Facet f;
        f.v = {std::min(a, b), std::max(a, b)};
        f.tri = {static_cast<int>(k), -1};
        f.local_edge = {e, -1};
        const Point& pa = vertices[a];
        const Point& pb = vertices[b];
        f.length = dist(pa, pb);
        // Outward normal of a counterclockwise triangle: rotate the edge
        // direction a -> b by -90 degrees in the (t,x) plane.
        f.normal = {(pb.x - pa.x) / f.length, -(pb.t - pa.t) / f.length};
        table.facets.push_back(f);
      } else {
        Facet& f = table.facets[it->second];
        if (f.tri[1] >= 0) {
          throw Error(ErrorCode::NonManifold,
                      "edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") borders more than two triangles");
        }
        f.tri[1] = static_cast<int>(k);
        f.local_edge[1] = e;
      }
      table.tri_facets[k][e] = it->second;
    }
  }

  for (auto& f : table.facets) {
    if (f.interior()) continue;
    f.tag = tag_boundary_edge(vertices[f.v[0]], vertices[f.v[1]], T_final);
    if (f.tag == BoundaryTag::Interior) {
      throw Error(ErrorCode::NonConforming,
                  "boundary edge (" + std::to_string(f.v[0]) + "," + std::to_string(f.v[1]) +
                      ") lies inside the domain (hanging node)");
    }
  }
  return table;
}

SpacetimeMesh::SpacetimeMesh(std::vector<Point> vertices,
                             std::vector<std::array<int, 3>> triangles,
                             double T_final,
                             std::optional<Interval> omega)
    : vertices_(std::move(vertices)), T_(T_final), omega_(omega) {
  if (!(T_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (triangles.empty()) throw Error(ErrorCode::InvalidArgument, "mesh has no triangles");

  const int nv = static_cast<int>(vertices_.size());
  for (const auto& p : vertices_) {
    const double tol = 1e-12;
    if (p.t < -tol || p.t > T_ + tol || p.x < -tol || p.x > 1.0 + tol) {
      throw Error(ErrorCode::OutOfDomain, "vertex outside (0,T)x(0,1)");
    }
  }

  triangles_.reserve(triangles.size());
  h_ = 0.0;
  h_min_ = std::numeric_limits<double>::infinity();
  for (const auto& tv : triangles) {
    for (int i : tv) {
      if (i < 0 || i >= nv) throw Error(ErrorCode::InvalidArgument, "triangle references missing vertex");
    }
    Triangle tri;
    tri.v = tv;
    const Point& a = vertices_[tv[0]];
    const Point& b = vertices_[tv[1]];
    const Point& c = vertices_[tv[2]];
    tri.area = signed_area(a, b, c);
    if (!(tri.area > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "triangle is degenerate or clockwise");
    }
    tri.diameter = std::max({dist(a, b), dist(b, c), dist(c, a)});
    h_ = std::max(h_, tri.diameter);
    h_min_ = std::min(h_min_, tri.diameter);
    triangles_.push_back(tri);
  }
  quasi_uniformity_ = h_ / h_min_;

  auto table = classify_facets(vertices_, triangles, T_);
  facets_ = std::move(table.facets);
  tri_facets_ = std::move(table.tri_facets);

  if (omega_) {
    try {
      (void)observation_cells(*this, *omega_);
      omega_conforming_ = true;
    } catch (const Error&) {
      omega_conforming_ = false;
    }
  }
}

double SpacetimeMesh::total_area() const {
  double a = 0.0;
  for (const auto& t : triangles_) a += t.area;
  return a;
}

double SpacetimeMesh::boundary_length() const {
  double len = 0.0;
  for (const auto& f : facets_) {
    if (!f.interior()) len += f.length;
  }
  return len;
}

Point SpacetimeMesh::centroid(int tri) const {
  const auto& v = triangles_[tri].v;
  const Point& a = vertices_[v[0]];
  const Point& b = vertices_[v[1]];
  const Point& c = vertices_[v[2]];
  return {(a.t + b.t + c.t) / 3.0, (a.x + b.x + c.x) / 3.0};
}

std::vector<char> observation_cells(const SpacetimeMesh& mesh, Interval omega) {
  const double tol = 1e-12;
  std::vector<char> inside(mesh.num_triangles(), 0);
  const auto& verts = mesh.vertices();
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const auto& v = mesh.triangles()[k].v;
    bool all_in = true;
    bool all_left = true;
    bool all_right = true;
    for (int i : v) {
      const double x = verts[i].x;
      all_in = all_in && x >= omega.lo - tol && x <= omega.hi + tol;
      all_left = all_left && x <= omega.lo + tol;
      all_right = all_right && x >= omega.hi - tol;
    }
    if (all_in) {
      inside[k] = 1;
    } else if (!all_left && !all_right) {
      throw Error(ErrorCode::OmegaNotAligned,
                  "triangle " + std::to_string(k) + " straddles the observation window");
    }
  }
  return inside;
}

SpacetimeMesh build_structured(int nx, int nt, double T, Interval omega, SplitPattern pattern) {
  if (nx < 2 || nt < 2) throw Error(ErrorCode::InvalidDims, "nx and nt must be at least 2");
  if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "T must be positive");
  if (!(omega.lo >= 0.0 && omega.hi <= 1.0 && omega.lo < omega.hi)) {
    throw Error(ErrorCode::InvalidArgument, "omega must be a nonempty subinterval of [0,1]");
  }
  for (double end : {omega.lo, omega.hi}) {
    const double s = end * nx;
    if (std::abs(s - std::round(s)) > 1e-9) {
      throw Error(ErrorCode::OmegaNotAligned,
                  "omega endpoint " + std::to_string(end) + " is not on the x-grid 1/" +
                      std::to_string(nx));
    }
  }

  std::vector<Point> verts;
  const auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= nt; ++j) {
    for (int i = 0; i <= nx; ++i) {
      verts.push_back({T * j / nt, static_cast<double>(i) / nx});
    }
  }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nx; ++i) {
      // Cell corners counterclockwise in the (t,x) plane.
      const int p00 = grid(i, j);
      const int p10 = grid(i, j + 1);
      const int p11 = grid(i + 1, j + 1);
      const int p01 = grid(i + 1, j);
      if (pattern == SplitPattern::Crisscross) {
        const int m = static_cast<int>(verts.size());
        verts.push_back({T * (j + 0.5) / nt, (i + 0.5) / nx});
        tris.push_back({m, p00, p10});
        tris.push_back({m, p10, p11});
        tris.push_back({m, p11, p01});
        tris.push_back({m, p01, p00});
      } else {
        tris.push_back({p10, p11, p00});
        tris.push_back({p01, p00, p11});
      }
    }
  }
  return SpacetimeMesh(std::move(verts), std::move(tris), T, omega);
}

SpacetimeMesh refine_uniform(const SpacetimeMesh& mesh) {
  std::vector<Point> verts = mesh.vertices();
  const int nv = static_cast<int>(verts.size());
  for (const auto& f : mesh.facets()) {
    const Point& a = mesh.vertices()[f.v[0]];
    const Point& b = mesh.vertices()[f.v[1]];
    verts.push_back({0.5 * (a.t + b.t), 0.5 * (a.x + b.x)});
  }
  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * mesh.num_triangles());
  for (std::size_t k = 0; k < mesh.num_triangles(); ++k) {
    const auto& v = mesh.triangles()[k].v;
    const auto& fe = mesh.tri_facets(static_cast<int>(k));
    const int m01 = nv + fe[0];
    const int m12 = nv + fe[1];
    const int m20 = nv + fe[2];
    // Children are similar to the parent; vertex 0 of each child sits opposite
    // the edge parallel to the parent's refinement edge.
    tris.push_back({v[0], m01, m20});
    tris.push_back({m01, v[1], m12});
    tris.push_back({m20, m12, v[2]});
    tris.push_back({m12, m20, m01});
  }
  return SpacetimeMesh(std::move(verts), std::move(tris), mesh.T(), mesh.omega());
}

ConformityReport check_conformity(const SpacetimeMesh& mesh) {
  ConformityReport r;
  r.area_error = std::abs(mesh.total_area() - mesh.T());
  r.boundary_error = std::abs(mesh.boundary_length() - (2.0 * mesh.T() + 2.0));
  for (const auto& f : mesh.facets()) {
    if (!f.interior() && f.tag == BoundaryTag::Interior) ++r.bad_facets;
    if (std::abs(std::hypot(f.normal.t, f.normal.x) - 1.0) > 1e-12) ++r.bad_normals;
    if (f.interior()) {
      // The normal is outward from tri[0]: it must point away from its centroid
      // and towards the centroid of tri[1].
      const Point& a = mesh.vertices()[f.v[0]];
      const Point c0 = mesh.centroid(f.tri[0]);
      const Point c1 = mesh.centroid(f.tri[1]);
      const double s0 = (c0.t - a.t) * f.normal.t + (c0.x - a.x) * f.normal.x;
      const double s1 = (c1.t - a.t) * f.normal.t + (c1.x - a.x) * f.normal.x;
      if (!(s0 < 0.0 && s1 > 0.0)) ++r.bad_normals;
    }
  }
  const double scale = std::max(1.0, mesh.T());
  r.conforming = r.area_error <= 1e-12 * scale && r.boundary_error <= 1e-12 * scale &&
                 r.bad_facets == 0 && r.bad_normals == 0;
  return r;
}

}  // namespace stfem
