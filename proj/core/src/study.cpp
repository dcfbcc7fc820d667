#include "stfem/study.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "stfem/error.hpp"

namespace stfem {

namespace {

const char* const kMetrics[] = {"rel_l2_M", "rel_l2_trace0", "hm1_dt_trace0",
                                "dual_norm", "triple_norm", "eta_total"};

std::string pair_stem(int example, int p, int q) {
  return "ex" + std::to_string(example) + "_p" + std::to_string(p) + "q" + std::to_string(q);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::Io, "cannot write " + path.string());
  return os;
}

}  // namespace

std::vector<LevelSpec> level_ladder(SplitPattern pattern, bool deep) {
  std::vector<LevelSpec> out;
  if (pattern == SplitPattern::Crisscross) {
    out = {{10, 13}, {20, 24}, {30, 50}, {50, 87}, {80, 160}};
  } else {
    for (int nx : {10, 20, 40, 60, 120}) out.push_back({nx, 2 * nx});
  }
  if (!deep) out.pop_back();
  return out;
}

void StudyManifest::validate() const {
  if (pairs.empty()) throw Error(ErrorCode::InvalidArgument, "no (p,q) pairs given");
  for (auto [p, q] : pairs) {
    ExperimentConfig c;
    c.example = example;
    c.T = T;
    c.omega = omega;
    c.p = p;
    c.q = q;
    c.level_lo = level_lo;
    c.level_hi = level_hi;
    c.k_max = k_max;
    c.validate(allow_locking);
  }
  const int n = static_cast<int>(level_ladder(pattern, true).size());
  if (level_hi >= n) throw Error(ErrorCode::InvalidArgument, "level range exceeds the ladder");
  if (level_hi == n - 1 && !deep) {
    throw Error(ErrorCode::InvalidArgument, "the finest level requires --deep");
  }
  if (adaptive.enabled && (adaptive.cycles < 0 || !(adaptive.theta > 0.0 && adaptive.theta <= 1.0))) {
    throw Error(ErrorCode::InvalidArgument, "adaptive settings out of range");
  }
}

ExactSolution StudyManifest::solution() const { return example == 1 ? example1() : example2(k_max); }

SaddleOptions StudyManifest::saddle_options() const {
  SaddleOptions o;
  o.gamma = gamma;
  o.gamma_star = gamma_star;
  o.variant = variant;
  o.allow_locking = allow_locking;
  o.allow_unstable = allow_unstable;
  o.threads = deterministic ? 1 : threads;
  return o;
}

LevelResult solve_level(const StudyManifest& m, int p, int q,
                        const std::shared_ptr<const SpacetimeMesh>& mesh, int level) {
  LevelResult r;
  r.report.level = level;
  r.report.h = mesh->h();
  try {
    const ExactSolution sol = m.solution();
    const auto vp = std::make_shared<const FESpace>(mesh, p);
    const auto vq = std::make_shared<const FESpace>(mesh, q);
    const ObservationData data = make_observation(sol, m.omega);
    const SaddleSystem sys = build_system(vp, vq, data, m.saddle_options());
    const SaddleSolution s = solve(sys);
    r.solve = s.report;
    if (m.deterministic) r.solve.seconds = 0.0;

    auto& e = r.report;
    e.ndof_p = vp->dof_count();
    e.ndof_q = vq->dof_count();
    e.rel_l2_M = error_l2_spacetime(s.u, sol.as_function(), NormOptions::for_solution(sol)).value;
    e.rel_l2_trace0 = error_trace0(s.u, sol).value;
    e.hm1_dt_trace0 = error_dt_trace0_hminus1(s.u, sol).value;
    e.dual_norm = dual_norm_l2h10(s.z);
    const DiscreteField pi_u = interpolate_nodal(vp, sol.as_function());
    e.triple_norm = triple_norm(sys, pi_u.coeffs - s.u.coeffs, s.z.coeffs);
    const EtaField eta = eta_indicators(s.u, s.z, data, m.variant);
    r.eta_sum = eta.total();
    r.eta_global = eta_global(sys, s.u, s.z, data);
    e.eta_total = r.eta_sum;
    e.solve_seconds = r.solve.seconds;
    r.ok = r.solve.status == SolveStatus::Ok;
    if (!r.ok) r.error = "solver residual above gate";
  } catch (const Error& err) {
    r.ok = false;
    r.error = err.what();
  }
  return r;
}

StudyResult run_convergence_study(const StudyManifest& m) {
  m.validate();
  const auto ladder = level_ladder(m.pattern, m.deep);
  std::vector<std::shared_ptr<const SpacetimeMesh>> meshes;
  for (int l = m.level_lo; l <= m.level_hi; ++l) {
    meshes.push_back(std::make_shared<const SpacetimeMesh>(
        build_structured(ladder[l].nx, ladder[l].nt, m.T, m.omega, m.pattern)));
  }
  const bool write = !m.out_dir.empty();
  if (write) std::filesystem::create_directories(m.out_dir);
  std::ofstream jsonl;
  if (write) jsonl = open_out(m.out_dir / "solve_reports.jsonl");

  StudyResult result;
  for (auto [p, q] : m.pairs) {
    PairResult pr;
    pr.p = p;
    pr.q = q;
    for (int l = m.level_lo; l <= m.level_hi; ++l) {
      LevelResult lr = solve_level(m, p, q, meshes[l - m.level_lo], l);
      if (!lr.ok) result.any_failure = true;
      if (write) {
        jsonl << "{\"example\":" << m.example << ",\"p\":" << p << ",\"q\":" << q
              << ",\"level\":" << l << ",\"ok\":" << (lr.ok ? "true" : "false")
              << ",\"report\":" << lr.solve.to_json();
        if (!lr.error.empty()) jsonl << ",\"error\":\"" << lr.error << '"';
        jsonl << "}\n";
      }
      pr.levels.push_back(std::move(lr));
    }

    std::vector<ErrorReport> rows;
    for (const auto& lr : pr.levels) {
      if (lr.ok) rows.push_back(lr.report);
    }
    if (write) {
      const auto path = m.out_dir / (pair_stem(m.example, p, q) + ".csv");
      {
        auto os = open_out(path);
        os << ErrorReport::csv_header() << '\n';
        for (const auto& r : rows) r.write_csv(os);
      }
      rows = read_study_csv(path);
    }
    for (const char* metric : kMetrics) {
      const auto h = column(rows, "h");
      const auto e = column(rows, metric);
      if (h.size() < 3) continue;
      try {
        pr.rates.emplace_back(metric, fit_rate(h, e));
      } catch (const Error&) {
        // zero or non-finite entries (e.g. an identically vanishing trace error)
      }
    }
    result.pairs.push_back(std::move(pr));
  }

  if (write) {
    auto os = open_out(m.out_dir / "rates.csv");
    os << "p,q,metric,beta,tau,r2\n" << std::setprecision(10);
    for (const auto& pr : result.pairs) {
      for (const auto& [metric, fit] : pr.rates) {
        os << pr.p << ',' << pr.q << ',' << metric << ',' << fit.beta << ',' << fit.tau << ','
           << fit.r2 << '\n';
      }
    }
    if (m.plots) {
      try {
        emit_plots(m.out_dir, m.example, m.pairs);
      } catch (const Error&) {
        // nothing plottable; the CSVs are still valid
      }
    }
  }
  return result;
}

AdaptiveResult run_adaptive(const StudyManifest& m, int p, int q) {
  m.validate();
  const ExactSolution sol = m.solution();
  const ObservationData data = make_observation(sol, m.omega);
  auto mesh = std::make_shared<const SpacetimeMesh>(build_structured(
      m.adaptive.coarse_nx, m.adaptive.coarse_nt, m.T, m.omega, SplitPattern::Diagonal));

  const bool write = !m.out_dir.empty();
  std::filesystem::path snap_dir;
  std::ofstream csv;
  if (write) {
    snap_dir = m.out_dir / ("adaptive_" + pair_stem(m.example, p, q));
    std::filesystem::create_directories(snap_dir);
    csv = open_out(m.out_dir / ("adaptive_" + pair_stem(m.example, p, q) + ".csv"));
    csv << "cycle,ntri,nvert,h_min,eta_total,rel_l2_M,dual_norm\n" << std::setprecision(10);
  }

  AdaptiveResult out;
  for (int cycle = 0; cycle <= m.adaptive.cycles; ++cycle) {
    const auto vp = std::make_shared<const FESpace>(mesh, p);
    const auto vq = std::make_shared<const FESpace>(mesh, q);
    const SaddleSystem sys = build_system(vp, vq, data, m.saddle_options());
    const SaddleSolution s = solve(sys);
    const EtaField eta = eta_indicators(s.u, s.z, data, m.variant);

    AdaptiveCycle c;
    c.cycle = cycle;
    c.ntri = static_cast<int>(mesh->num_triangles());
    c.nvert = static_cast<int>(mesh->num_vertices());
    c.h_min = mesh->h_min();
    c.eta_total = eta.total();
    c.rel_l2_M = error_l2_spacetime(s.u, sol.as_function(), NormOptions::for_solution(sol)).value;
    c.dual_norm = dual_norm_l2h10(s.z);
    c.conforming = check_conformity(*mesh).conforming;
    c.marked = dorfler_mark(eta.eta2, m.adaptive.theta);
    if (write) {
      csv << c.cycle << ',' << c.ntri << ',' << c.nvert << ',' << c.h_min << ',' << c.eta_total << ','
          << c.rel_l2_M << ',' << c.dual_norm << '\n';
      write_mesh(snap_dir / ("mesh_cycle" + std::to_string(cycle) + ".txt"), *mesh);
    }
    out.cycles.push_back(c);
    out.final_mesh = mesh;
    if (cycle == m.adaptive.cycles) break;
    mesh = std::make_shared<const SpacetimeMesh>(refine_adaptive(*mesh, out.cycles.back().marked));
  }
  return out;
}

double characteristic_distance(Point p) {
  double best = std::numeric_limits<double>::infinity();
  for (double x0 : {1.0 / 3.0, 0.5, 2.0 / 3.0}) {
    for (double s1 : {-1.0, 1.0}) {
      for (double s2 : {-1.0, 1.0}) {
        // x - s1 x0 - s2 t = 2m for the unfolded (reflected) line
        const double r = p.x - s1 * x0 - s2 * p.t;
        const double m = std::round(r / 2.0);
        best = std::min(best, std::abs(r - 2.0 * m) / std::numbers::sqrt2);
      }
    }
  }
  return best;
}

double fraction_near_characteristics(const SpacetimeMesh& mesh, std::span<const int> tris,
                                     double factor) {
  if (tris.empty()) return 0.0;
  int near = 0;
  for (int t : tris) {
    if (characteristic_distance(mesh.centroid(t)) <= factor * mesh.triangles()[t].diameter) ++near;
  }
  return static_cast<double>(near) / tris.size();
}

std::vector<ErrorReport> read_study_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != ErrorReport::csv_header()) {
    throw Error(ErrorCode::Io, path.string() + ": unexpected header");
  }
  std::vector<ErrorReport> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ErrorReport r;
    char comma = 0;
    ss >> r.level >> comma >> r.h >> comma >> r.ndof_p >> comma >> r.ndof_q >> comma >> r.rel_l2_M >>
        comma >> r.rel_l2_trace0 >> comma >> r.hm1_dt_trace0 >> comma >> r.dual_norm >> comma >>
        r.triple_norm >> comma >> r.eta_total >> comma >> r.solve_seconds;
    if (!ss) throw Error(ErrorCode::Io, path.string() + ": malformed row");
    rows.push_back(r);
  }
  return rows;
}

std::vector<double> column(const std::vector<ErrorReport>& rows, const std::string& metric) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    if (metric == "h") out.push_back(r.h);
    else if (metric == "rel_l2_M") out.push_back(r.rel_l2_M);
    else if (metric == "rel_l2_trace0") out.push_back(r.rel_l2_trace0);
    else if (metric == "hm1_dt_trace0") out.push_back(r.hm1_dt_trace0);
    else if (metric == "dual_norm") out.push_back(r.dual_norm);
    else if (metric == "triple_norm") out.push_back(r.triple_norm);
    else if (metric == "eta_total") out.push_back(r.eta_total);
    else if (metric == "solve_seconds") out.push_back(r.solve_seconds);
    else throw Error(ErrorCode::InvalidArgument, "unknown metric " + metric);
  }
  return out;
}

}  // namespace stfem
