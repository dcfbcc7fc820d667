#include <algorithm>
#include <cmath>
#include <map>

#include "local.hpp"
#include "stfem/analysis.hpp"
#include "stfem/error.hpp"

namespace stfem {

namespace {

struct SubRule {
  std::vector<Vec2> points;  // parent reference coordinates
  std::vector<double> weights;
};

// Rule of the given degree replicated on an s x s split of the reference
// triangle.
SubRule sub_rule(int degree, int s) {
  const QuadratureRule& base = quadrature_for(degree);
  SubRule out;
  const double scale = 1.0 / s;
  auto add = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
    for (std::size_t q = 0; q < base.size(); ++q) {
      const double r = base.points[q][0], t = base.points[q][1];
      out.points.push_back(a + r * (b - a) + t * (c - a));
      out.weights.push_back(base.weights[q] * scale * scale);
    }
  };
  for (int i = 0; i < s; ++i) {
    for (int j = 0; i + j < s; ++j) {
      const Vec2 p00(i * scale, j * scale);
      const Vec2 p10((i + 1) * scale, j * scale);
      const Vec2 p01(i * scale, (j + 1) * scale);
      add(p00, p10, p01);
      if (i + j + 1 < s) add(p10, Vec2((i + 1) * scale, (j + 1) * scale), p01);
    }
  }
  return out;
}

int subdivisions(double diameter, double length_scale) {
  return std::max(1, static_cast<int>(std::ceil(diameter / length_scale - 1e-9)));
}

// Sum over triangles of int_K g(value of u_h, t, x); u_h may be null.
template <class G>
double integrate_cells(const SpacetimeMesh& mesh, const DiscreteField* u_h, const NormOptions& opt,
                       G&& g) {
  struct Tab {
    SubRule rule;
    std::vector<BasisEval> basis;
  };
  std::map<int, Tab> cache;
  auto table = [&](int s) -> const Tab& {
    auto it = cache.find(s);
    if (it != cache.end()) return it->second;
    Tab t;
    t.rule = sub_rule(opt.degree, s);
    if (u_h) {
      t.basis.resize(t.rule.points.size());
      for (std::size_t q = 0; q < t.rule.points.size(); ++q) {
        u_h->space->element().eval(t.rule.points[q], t.basis[q], false);
      }
    }
    return cache.emplace(s, std::move(t)).first->second;
  };

  double total = 0.0;
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const int ci = static_cast<int>(c);
    const AffineMap map = AffineMap::of(mesh, ci);
    const Tab& tab = table(subdivisions(mesh.triangles()[c].diameter, opt.length_scale));
    std::span<const int> dofs;
    if (u_h) dofs = u_h->space->cell_dofs(ci);
    double acc = 0.0;
    for (std::size_t q = 0; q < tab.rule.points.size(); ++q) {
      const Vec2 p = map.to_physical(tab.rule.points[q]);
      double v = 0.0;
      if (u_h) {
        for (std::size_t i = 0; i < dofs.size(); ++i) v += u_h->coeffs(dofs[i]) * tab.basis[q].value[i];
      }
      acc += tab.rule.weights[q] * g(v, p.x(), p.y());
    }
    total += acc * std::abs(map.det);
  }
  return total;
}

// Sum over segments of int g(x) dx with Gauss points, segments split to
// `length_scale`.
template <class G>
double integrate_segments(std::span<const double> breaks, double length_scale, G&& g) {
  const LineRule& rule = line_rule_for(18);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const int s = subdivisions(b - a, length_scale);
    const double len = (b - a) / s;
    for (int k = 0; k < s; ++k) {
      const double lo = a + k * len;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = lo + len * rule.points[q];
        total += len * rule.weights[q] * g(i, x);
      }
    }
  }
  return total;
}

RelativeError make_relative(double num, double den) {
  RelativeError r;
  r.numerator = num;
  r.denominator = den;
  if (den > 1e-300) {
    r.value = num / den;
  } else {
    r.value = num;
    r.absolute = true;
  }
  return r;
}

struct InitialSegment {
  double x0, x1;
  int tri;
};

std::vector<InitialSegment> initial_segments(const SpacetimeMesh& mesh) {
  std::vector<InitialSegment> out;
  for (const Facet& f : mesh.facets()) {
    if (f.tag != BoundaryTag::Initial) continue;
    double a = mesh.vertices()[f.v[0]].x, b = mesh.vertices()[f.v[1]].x;
    if (a > b) std::swap(a, b);
    out.push_back({a, b, f.tri[0]});
  }
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.x0 < r.x0; });
  return out;
}

Piecewise1D initial_trace(const DiscreteField& u_h, bool derivative) {
  const auto segs = initial_segments(u_h.space->mesh());
  Piecewise1D pw;
  std::vector<int> tri;
  if (segs.empty()) return pw;
  pw.breaks.push_back(segs.front().x0);
  for (const auto& s : segs) {
    pw.breaks.push_back(s.x1);
    tri.push_back(s.tri);
  }
  pw.on = [field = u_h, tri = std::move(tri), derivative](std::size_t seg, double x) {
    const FieldSample s = eval_on_cell(field, tri[seg], Point{0.0, x});
    return derivative ? s.grad.x() : s.value;
  };
  return pw;
}

}  // namespace

double Piecewise1D::operator()(double x) const {
  if (breaks.size() < 2) return 0.0;
  auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  std::size_t seg = it == breaks.begin() ? 0 : static_cast<std::size_t>(it - breaks.begin()) - 1;
  seg = std::min(seg, segments() - 1);
  return on(seg, x);
}

double l2_norm_exact(const SpacetimeMesh& mesh, const SpacetimeFunction& u, const NormOptions& opt) {
  return std::sqrt(integrate_cells(mesh, nullptr, opt, [&](double, double t, double x) {
    const double v = u(t, x);
    return v * v;
  }));
}

RelativeError error_l2_spacetime(const DiscreteField& u_h, const SpacetimeFunction& u,
                                 const NormOptions& opt) {
  const double num2 = integrate_cells(u_h.space->mesh(), &u_h, opt, [&](double v, double t, double x) {
    const double e = u(t, x);
    return (e - v) * (e - v);
  });
  return make_relative(std::sqrt(num2), l2_norm_exact(u_h.space->mesh(), u, opt));
}

Piecewise1D trace_at_initial(const DiscreteField& u_h) { return initial_trace(u_h, false); }

Piecewise1D dt_trace_at_initial(const DiscreteField& u_h) { return initial_trace(u_h, true); }

double hminus1_norm(const std::function<double(double)>& f, std::span<const double> breaks,
                    int cells, double length_scale) {
  if (cells < 1) throw Error(ErrorCode::InvalidArgument, "need at least one auxiliary cell");
  std::vector<double> nodes;
  nodes.reserve(cells + 1 + breaks.size());
  for (int i = 0; i <= cells; ++i) nodes.push_back(static_cast<double>(i) / cells);
  for (double b : breaks) {
    if (b > 0.0 && b < 1.0) nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              nodes.end());
  nodes.back() = 1.0;

  const std::size_t n = nodes.size();
  std::vector<double> load(n, 0.0);
  const LineRule& rule = line_rule_for(18);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    const int s = subdivisions(b - a, length_scale);
    const double len = (b - a) / s;
    for (int k = 0; k < s; ++k) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = a + k * len + len * rule.points[q];
        const double lam = (x - a) / (b - a);
        const double wf = len * rule.weights[q] * f(x);
        load[i] += wf * (1.0 - lam);
        load[i + 1] += wf * lam;
      }
    }
  }

  // Thomas algorithm on interior nodes 1..n-2.
  const std::size_t m = n - 2;
  if (m == 0) return 0.0;
  std::vector<double> diag(m), off(m), rhs(m), w(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double hl = nodes[i + 1] - nodes[i];
    const double hr = nodes[i + 2] - nodes[i + 1];
    diag[i] = 1.0 / hl + 1.0 / hr;
    off[i] = -1.0 / hr;  // coupling to the next node
    rhs[i] = load[i + 1];
  }
  std::vector<double> cp(m), dp(m);
  cp[0] = off[0] / diag[0];
  dp[0] = rhs[0] / diag[0];
  for (std::size_t i = 1; i < m; ++i) {
    const double denom = diag[i] - off[i - 1] * cp[i - 1];
    cp[i] = off[i] / denom;
    dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / denom;
  }
  w[m - 1] = dp[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) w[i] = dp[i] - cp[i] * w[i + 1];
  double energy = 0.0;
  for (std::size_t i = 0; i < m; ++i) energy += rhs[i] * w[i];
  return std::sqrt(std::max(0.0, energy));
}

RelativeError error_trace0(const DiscreteField& u_h, const ExactSolution& u) {
  const Piecewise1D tr = trace_at_initial(u_h);
  const double num2 = integrate_segments(tr.breaks, u.length_scale, [&](std::size_t s, double x) {
    const double e = u.value(0.0, x) - tr.on(s, x);
    return e * e;
  });
  const double den2 = integrate_segments(tr.breaks, u.length_scale, [&](std::size_t, double x) {
    const double e = u.value(0.0, x);
    return e * e;
  });
  return make_relative(std::sqrt(num2), std::sqrt(den2));
}

RelativeError error_dt_trace0_hminus1(const DiscreteField& u_h, const ExactSolution& u, int cells) {
  const Piecewise1D tr = dt_trace_at_initial(u_h);
  const double ls = std::min(u.length_scale, 1.0);
  const double num = hminus1_norm([&](double x) { return u.dt(0.0, x) - tr(x); }, tr.breaks, cells, ls);
  const double den = hminus1_norm([&](double x) { return u.dt(0.0, x); }, tr.breaks, cells, ls);
  return make_relative(num, den > 1e-14 ? den : 0.0);
}

double dual_norm_l2h10(const DiscreteField& z_h) {
  const FESpace& space = *z_h.space;
  const SpacetimeMesh& mesh = space.mesh();
  const QuadratureRule& rule = quadrature_for(2 * space.degree() + 2);
  std::vector<BasisEval> tab(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    space.element().eval(Vec2(rule.points[q][0], rule.points[q][1]), tab[q], false);
  }
  double total = 0.0;
  BasisEval be;
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    const int ci = static_cast<int>(c);
    const AffineMap map = AffineMap::of(mesh, ci);
    const auto dofs = space.cell_dofs(ci);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      detail::to_physical(map, tab[q], be, false);
      double dx = 0.0;
      for (std::size_t i = 0; i < dofs.size(); ++i) dx += z_h.coeffs(dofs[i]) * be.grad[i].y();
      acc += rule.weights[q] * dx * dx;
    }
    total += acc * std::abs(map.det);
  }
  return std::sqrt(total);
}

}  // namespace stfem
