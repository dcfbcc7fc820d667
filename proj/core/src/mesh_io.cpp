#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "stfem/error.hpp"
#include "stfem/mesh.hpp"

namespace stfem {

void write_mesh(std::ostream& os, const SpacetimeMesh& mesh) {
  os << "spacetime-mesh v1 " << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices()) os << p.t << ' ' << p.x << '\n';
  for (const auto& t : mesh.triangles()) os << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
}

void write_mesh(const std::filesystem::path& path, const SpacetimeMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  write_mesh(os, mesh);
}

SpacetimeMesh read_mesh(std::istream& is, std::optional<Interval> omega) {
  std::string magic, version;
  std::size_t nvert = 0, ntri = 0;
  if (!(is >> magic >> version >> nvert >> ntri) || magic != "spacetime-mesh" || version != "v1") {
    throw Error(ErrorCode::Io, "missing 'spacetime-mesh v1' header");
  }
  std::vector<Point> verts(nvert);
  double T = 0.0;
  for (auto& p : verts) {
    if (!(is >> p.t >> p.x)) throw Error(ErrorCode::Io, "truncated vertex block");
    T = std::max(T, p.t);
  }
  std::vector<std::array<int, 3>> tris(ntri);
  for (auto& t : tris) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw Error(ErrorCode::Io, "truncated triangle block");
    for (int i : t) {
      if (i < 0 || static_cast<std::size_t>(i) >= nvert) {
        throw Error(ErrorCode::Io, "triangle references vertex " + std::to_string(i));
      }
    }
    // Accept clockwise input; swapping v1 and v2 keeps the refinement edge.
    const Point& a = verts[t[0]];
    const Point& b = verts[t[1]];
    const Point& c = verts[t[2]];
    if ((b.t - a.t) * (c.x - a.x) - (b.x - a.x) * (c.t - a.t) < 0.0) std::swap(t[1], t[2]);
  }
  return SpacetimeMesh(std::move(verts), std::move(tris), T, omega);
}

SpacetimeMesh read_mesh(const std::filesystem::path& path, std::optional<Interval> omega) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return read_mesh(is, omega);
}

}  // namespace stfem
