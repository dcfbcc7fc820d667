#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace stfem {

/// A point of the spacetime rectangle (0,T) x (0,1). Time is the first
/// coordinate everywhere in the library.
struct Point {
  double t = 0.0;
  double x = 0.0;
};

/// Open spatial interval, used for the observation window omega.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(double x) const { return x > lo && x < hi; }
  double length() const { return hi - lo; }
};

enum class BoundaryTag : std::uint8_t { Interior, Sigma, Initial, Final };

/// Vertices are stored counterclockwise. The edge opposite v[0] is the
/// refinement edge used by newest-vertex bisection.
struct Triangle {
  std::array<int, 3> v{};
  double diameter = 0.0;
  double area = 0.0;
};

/// Mesh edge. Local edge e of a triangle joins v[e] and v[(e+1)%3].
struct Facet {
  std::array<int, 2> v{};             // sorted: v[0] < v[1]
  std::array<int, 2> tri{-1, -1};     // tri[1] < 0 on the boundary
  std::array<int, 2> local_edge{-1, -1};
  BoundaryTag tag = BoundaryTag::Interior;
  Point normal;                       // unit, outward from tri[0]
  double length = 0.0;

  bool interior() const { return tri[1] >= 0; }
};

enum class SplitPattern { Crisscross, Diagonal };

struct FacetTable {
  std::vector<Facet> facets;
  std::vector<std::array<int, 3>> tri_facets;
};

/// Conforming triangulation of (0,T) x (0,1). Immutable after construction;
/// refinement returns a new mesh.
class SpacetimeMesh {
public:
  SpacetimeMesh(std::vector<Point> vertices,
                std::vector<std::array<int, 3>> triangles,
                double T_final,
                std::optional<Interval> omega = std::nullopt);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::array<int, 3>& tri_facets(int tri) const { return tri_facets_[tri]; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_facets() const { return facets_.size(); }

  /// Global mesh size, max_K diam(K).
  double h() const { return h_; }
  double h_min() const { return h_min_; }
  double T() const { return T_; }
  /// max_K h / h_K.
  double quasi_uniformity() const { return quasi_uniformity_; }

  const std::optional<Interval>& omega() const { return omega_; }
  /// True when every triangle lies entirely inside or entirely outside
  /// (0,T) x omega. Always false when no omega is attached.
  bool omega_conforming() const { return omega_conforming_; }

  double total_area() const;
  double boundary_length() const;
  Point centroid(int tri) const;

private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> tri_facets_;
  double T_ = 0.0;
  double h_ = 0.0;
  double h_min_ = 0.0;
  double quasi_uniformity_ = 1.0;
  std::optional<Interval> omega_;
  bool omega_conforming_ = false;
};

/// Enumerate edges, tag boundary edges and compute normals.
/// Throws NonManifold if an edge is shared by more than two triangles and
/// NonConforming if a boundary edge is not on the rectangle boundary.
FacetTable classify_facets(std::span<const Point> vertices,
                           std::span<const std::array<int, 3>> triangles,
                           double T_final);

/// Structured triangulation with nx x nt grid cells. Crisscross splits each
/// cell into four triangles through its centre; Diagonal into two along the
/// (t,x) -> (t+dt,x+dx) diagonal.
SpacetimeMesh build_structured(int nx, int nt, double T, Interval omega,
                               SplitPattern pattern = SplitPattern::Crisscross);

/// Red refinement: every triangle is split into four similar children.
SpacetimeMesh refine_uniform(const SpacetimeMesh& mesh);

/// Newest-vertex bisection of the marked triangles followed by conforming
/// closure. Marked triangles are bisected at least once.
SpacetimeMesh refine_adaptive(const SpacetimeMesh& mesh, std::span<const int> marked);

/// Per-triangle flag (1 = inside (0,T) x omega). Throws OmegaNotAligned if a
/// triangle straddles an endpoint of omega.
std::vector<char> observation_cells(const SpacetimeMesh& mesh, Interval omega);

struct ConformityReport {
  bool conforming = true;
  double area_error = 0.0;      // |sum area - T|
  double boundary_error = 0.0;  // |boundary length - (2T + 2)|
  int bad_facets = 0;
  int bad_normals = 0;
};

ConformityReport check_conformity(const SpacetimeMesh& mesh);

/// Plain text format: "spacetime-mesh v1 <nvert> <ntri>", vertices "t x",
/// triangles "v0 v1 v2". Facets are recomputed on load and T is taken as the
/// largest vertex time.
void write_mesh(std::ostream& os, const SpacetimeMesh& mesh);
void write_mesh(const std::filesystem::path& path, const SpacetimeMesh& mesh);
SpacetimeMesh read_mesh(std::istream& is, std::optional<Interval> omega = std::nullopt);
SpacetimeMesh read_mesh(const std::filesystem::path& path,
                        std::optional<Interval> omega = std::nullopt);

}  // namespace stfem
