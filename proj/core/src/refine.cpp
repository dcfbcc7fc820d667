#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "stfem/error.hpp"
#include "stfem/mesh.hpp"

namespace stfem {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

}  // namespace

SpacetimeMesh refine_adaptive(const SpacetimeMesh& mesh, std::span<const int> marked) {
  const int ntri = static_cast<int>(mesh.num_triangles());
  std::vector<char> flag(ntri, 0);
  for (int k : marked) {
    if (k < 0 || k >= ntri) {
      throw Error(ErrorCode::InvalidArgument, "marked triangle id " + std::to_string(k) + " out of range");
    }
    flag[k] = 1;
  }

  std::vector<Point> verts = mesh.vertices();
  std::vector<std::array<int, 3>> tris;
  tris.reserve(mesh.num_triangles());
  for (const auto& t : mesh.triangles()) tris.push_back(t.v);

  // Midpoint vertex of every edge bisected so far.
  std::unordered_map<std::uint64_t, int> midpoint;

  const auto midpoint_of = [&](int a, int b) {
    auto [it, inserted] = midpoint.try_emplace(edge_key(a, b), static_cast<int>(verts.size()));
    if (inserted) {
      verts.push_back({0.5 * (verts[a].t + verts[b].t), 0.5 * (verts[a].x + verts[b].x)});
    }
    return it->second;
  };

  bool pending = std::any_of(flag.begin(), flag.end(), [](char c) { return c != 0; });
  while (pending) {
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() + 2 * marked.size());
    for (std::size_t k = 0; k < tris.size(); ++k) {
      const auto& v = tris[k];
      if (!flag[k]) {
        next.push_back(v);
        continue;
      }
      // Bisect the refinement edge (v1,v2); the midpoint becomes the newest
      // vertex of both children.
      const int m = midpoint_of(v[1], v[2]);
      next.push_back({m, v[0], v[1]});
      next.push_back({m, v[2], v[0]});
    }
    tris = std::move(next);

    // Closure: any triangle with a bisected edge still carries a hanging node.
    flag.assign(tris.size(), 0);
    pending = false;
    for (std::size_t k = 0; k < tris.size(); ++k) {
      const auto& v = tris[k];
      for (int e = 0; e < 3; ++e) {
        if (midpoint.count(edge_key(v[e], v[(e + 1) % 3])) != 0) {
          flag[k] = 1;
          pending = true;
          break;
        }
      }
    }
  }

  return SpacetimeMesh(std::move(verts), std::move(tris), mesh.T(), mesh.omega());
}

}  // namespace stfem
