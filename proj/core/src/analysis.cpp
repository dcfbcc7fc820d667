#include "stfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "squares.hpp"
#include "stfem/error.hpp"

namespace stfem {

namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

QuadratureOptions raised(int degree, int extra) {
  const int d = std::min(kMaxQuadratureDegree, 2 * degree + extra);
  return {d, d, d};
}

}  // namespace

double triple_norm(const SaddleSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& z) {
  const double v = u.dot(sys.mass_o * u) + u.dot(sys.stab * u) + z.dot(sys.dual_stab * z);
  return std::sqrt(std::max(0.0, v));
}

double stabilizer_error(const DiscreteField& u_h, const JetFunction& u, PrimalStab variant,
                        int extra_degree) {
  const auto recipe = detail::primal_recipe(variant, u_h.space->mesh().h());
  return sum(detail::local_squares(u_h, recipe, {}, raised(u_h.space->degree(), extra_degree), &u));
}

double triple_norm_error(const DiscreteField& u_h, const DiscreteField* z_h, const JetFunction& u,
                         Interval omega, StabVariant variant, int extra_degree) {
  const auto mask = observation_cells(u_h.space->mesh(), omega);
  detail::SquareRecipe mass;
  mass.value_volume = 1.0;
  const auto quad = raised(u_h.space->degree(), extra_degree);
  double total = sum(detail::local_squares(u_h, mass, mask, quad, &u));
  total += stabilizer_error(u_h, u, variant.primal, extra_degree);
  if (z_h) total += sum(dual_stabilizer_local(*z_h, variant.dual));
  return std::sqrt(std::max(0.0, total));
}

double continuity_norm(const DiscreteField& u_h, const JetFunction* u, int extra_degree) {
  const double h = u_h.space->mesh().h();
  const auto quad = raised(u_h.space->degree(), extra_degree);
  constexpr int sigma = static_cast<int>(BoundaryTag::Sigma);
  constexpr int initial = static_cast<int>(BoundaryTag::Initial);
  constexpr int final_ = static_cast<int>(BoundaryTag::Final);

  detail::SquareRecipe grad;
  grad.grad_volume = 1.0;
  // On t = 0 and t = T, A grad v . n = -/+ d_t v; on Sigma it is +/- d_x v.
  detail::SquareRecipe flux;
  flux.boundary_dt[initial] = h;
  flux.boundary_dt[final_] = h;
  flux.boundary_dx[sigma] = h;
  detail::SquareRecipe trace;
  trace.boundary_value[sigma] = 1.0 / h;

  double total = 0.0;
  for (const auto& r : {grad, flux, trace}) {
    total += std::sqrt(std::max(0.0, sum(detail::local_squares(u_h, r, {}, quad, u))));
  }
  return total;
}

double EtaField::total() const { return sum(eta2); }

EtaField eta_indicators(const DiscreteField& u_h, const DiscreteField& z_h,
                        const ObservationData& data, StabVariant variant) {
  EtaField f;
  f.misfit = observation_misfit_local(u_h, data);
  f.primal = primal_stabilizer_local(u_h, variant.primal);
  f.dual = dual_stabilizer_local(z_h, variant.dual);
  f.eta2.resize(f.misfit.size());
  for (std::size_t k = 0; k < f.eta2.size(); ++k) f.eta2[k] = f.misfit[k] + f.primal[k] + f.dual[k];
  return f;
}

double eta_global(const SaddleSystem& sys, const DiscreteField& u_h, const DiscreteField& z_h,
                  const ObservationData& data) {
  // One pass over the mesh per term, with no per-triangle splitting.
  const FESpace& space = *u_h.space;
  const SpacetimeMesh& mesh = space.mesh();
  const auto mask = observation_cells(mesh, data.omega);
  const int deg = sys.options.quad.data > 0 ? sys.options.quad.data : 2 * space.degree() + 4;
  const QuadratureRule& rule = quadrature_for(deg);
  std::vector<BasisEval> tab(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    space.element().eval(Vec2(rule.points[q][0], rule.points[q][1]), tab[q], false);
  }
  double misfit = 0.0;
  for (std::size_t c = 0; c < mesh.num_triangles(); ++c) {
    if (!mask[c]) continue;
    const int ci = static_cast<int>(c);
    const AffineMap map = AffineMap::of(mesh, ci);
    const auto dofs = space.cell_dofs(ci);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vec2 p = map.to_physical(Vec2(rule.points[q][0], rule.points[q][1]));
      double v = -data(p.x(), p.y());
      for (std::size_t i = 0; i < dofs.size(); ++i) v += u_h.coeffs(dofs[i]) * tab[q].value[i];
      misfit += rule.weights[q] * std::abs(map.det) * v * v;
    }
  }
  const double h = mesh.h();
  const double s = detail::global_squares(u_h, detail::primal_recipe(sys.options.variant.primal, h));
  const double s_star =
      detail::global_squares(z_h, detail::dual_recipe(sys.options.variant.dual, z_h.space->mesh().h()));
  return misfit + s + s_star;
}

std::vector<int> dorfler_mark(std::span<const double> eta2, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "theta must be in (0,1]");
  std::vector<int> order(eta2.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return eta2[a] > eta2[b]; });
  const double total = std::accumulate(eta2.begin(), eta2.end(), 0.0);
  std::vector<int> marked;
  if (total <= 0.0) return marked;
  double acc = 0.0;
  for (int k : order) {
    if (acc >= theta * total) break;
    marked.push_back(k);
    acc += eta2[k];
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

RateFit fit_rate(std::span<const double> h, std::span<const double> e) {
  if (h.size() != e.size() || h.size() < 3) {
    throw Error(ErrorCode::InvalidArgument, "rate fit needs at least three (h, error) pairs");
  }
  const std::size_t n = h.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !(e[i] > 0.0) || !std::isfinite(h[i]) || !std::isfinite(e[i])) {
      throw Error(ErrorCode::NonPositive, "rate fit needs positive finite values");
    }
    x[i] = std::log(h[i]);
    y[i] = std::log(e[i]);
  }
  const double mx = sum(x) / n, my = sum(y) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::InvalidArgument, "rate fit needs distinct h values");
  RateFit f;
  f.tau = sxy / sxx;
  const double intercept = my - f.tau * mx;
  f.beta = std::exp(intercept);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (intercept + f.tau * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.points = static_cast<int>(n);
  return f;
}

const char* ErrorReport::csv_header() {
  return "level,h,ndof_p,ndof_q,rel_l2_M,rel_l2_trace0,hm1_dt_trace0,dual_norm,triple_norm,"
         "eta_total,solve_seconds";
}

void ErrorReport::write_csv(std::ostream& os) const {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(10);
  os << level << ',' << h << ',' << ndof_p << ',' << ndof_q << ',' << rel_l2_M << ','
     << rel_l2_trace0 << ',' << hm1_dt_trace0 << ',' << dual_norm << ',' << triple_norm << ','
     << eta_total << ',' << solve_seconds << '\n';
  os.flags(flags);
  os.precision(prec);
}

}  // namespace stfem
