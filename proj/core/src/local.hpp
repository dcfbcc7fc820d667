#pragma once

// Reference tabulations and small helpers shared by the assembly routines.

#include <algorithm>
#include <array>
#include <exception>
#include <thread>
#include <vector>

#include "stfem/fespace.hpp"
#include "stfem/quadrature.hpp"

namespace stfem::detail {

/// Basis tabulated at the points of a volume rule and, for each local edge and
/// traversal direction, at the points of a line rule.
struct CellTables {
  const QuadratureRule* rule = nullptr;
  const LineRule* line = nullptr;
  std::vector<BasisEval> vol;
  std::array<std::vector<BasisEval>, 6> edge;  // index 2*e + reversed
};

inline Vec2 reference_corner(int i) {
  static const std::array<Vec2, 3> c{Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};
  return c[i % 3];
}

inline CellTables make_tables(const ReferenceElement& el, const QuadratureRule& rule,
                              const LineRule& line, bool hess) {
  CellTables t;
  t.rule = &rule;
  t.line = &line;
  t.vol.resize(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    el.eval(Vec2(rule.points[q][0], rule.points[q][1]), t.vol[q], hess);
  }
  for (int e = 0; e < 3; ++e) {
    const Vec2 a = reference_corner(e);
    const Vec2 b = reference_corner(e + 1);
    for (int rev = 0; rev < 2; ++rev) {
      auto& tab = t.edge[2 * e + rev];
      tab.resize(line.size());
      for (std::size_t q = 0; q < line.size(); ++q) {
        const double s = rev ? 1.0 - line.points[q] : line.points[q];
        el.eval(a + s * (b - a), tab[q], hess);
      }
    }
  }
  return t;
}

/// Table index for traversing facet f (parameter running from f.v[0] to
/// f.v[1]) as local edge `e` of triangle `tri`.
inline int edge_table_index(const SpacetimeMesh& mesh, int tri, int e, const Facet& f) {
  const bool reversed = mesh.triangles()[tri].v[e] != f.v[0];
  return 2 * e + (reversed ? 1 : 0);
}

inline void to_physical(const AffineMap& map, const BasisEval& ref, BasisEval& out, bool hess) {
  out.value = ref.value;
  out.grad = ref.grad;
  if (hess) out.hess = ref.hess;
  push_forward(map, out, hess);
}

/// Wave operator d_tt - d_xx of a physical Hessian.
inline double box(const Mat2& hess) { return hess(0, 0) - hess(1, 1); }

/// Minkowski metric A = diag(-1, 1) applied to a (d_t, d_x) gradient.
inline Vec2 minkowski(const Vec2& g) { return Vec2(-g.x(), g.y()); }

inline Vec2 to_vec(const Point& p) { return Vec2(p.t, p.x); }

/// Split [0, n) into contiguous chunks processed by `fn(begin, end, chunk)`.
/// Chunk outputs are merged in index order, so results do not depend on the
/// number of threads.
template <class Output, class Fn>
std::vector<Output> chunked(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const std::size_t nchunks = std::max<std::size_t>(1, std::min<std::size_t>(threads, n / 256 + 1));
  std::vector<Output> out(nchunks);
  if (nchunks == 1) {
    fn(std::size_t{0}, n, out[0]);
    return out;
  }
  std::vector<std::exception_ptr> errors(nchunks);
  std::vector<std::thread> pool;
  for (std::size_t c = 0; c < nchunks; ++c) {
    const std::size_t b = n * c / nchunks;
    const std::size_t e = n * (c + 1) / nchunks;
    pool.emplace_back([&, b, e, c] {
      try {
        fn(b, e, out[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  return out;
}

}  // namespace stfem::detail
