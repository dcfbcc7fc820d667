#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stfem/analysis.hpp"

namespace stfem {

struct LevelSpec {
  int nx = 0;
  int nt = 0;
};

/// Structured mesh ladder with h close to 0.157, 0.082, 0.040, 0.023, 0.0125.
/// Crisscross: nx stays a multiple of 10 so omega = (0.1, 0.3) is aligned, and
/// nt sets the longest edge 2/nt. Diagonal: nx in {10, 20, 40, 60, 120},
/// nt = 2 nx, h = sqrt(2)/nx. The last level is only included with `deep`.
std::vector<LevelSpec> level_ladder(SplitPattern pattern = SplitPattern::Crisscross, bool deep = false);

struct AdaptiveSettings {
  bool enabled = false;
  int cycles = 6;
  double theta = 0.5;
  int coarse_nx = 10;
  int coarse_nt = 14;
};

struct StudyManifest {
  int example = 1;
  std::vector<std::pair<int, int>> pairs{{1, 1}};
  double T = 2.0;
  Interval omega{0.1, 0.3};
  double gamma = 1e-3;
  double gamma_star = 1.0;
  StabVariant variant;
  int level_lo = 0;
  int level_hi = 3;
  bool deep = false;
  SplitPattern pattern = SplitPattern::Crisscross;
  int k_max = 50;
  bool allow_locking = false;
  bool allow_unstable = false;
  /// Single-threaded assembly and solve_seconds written as 0, so reruns give
  /// byte-identical files.
  bool deterministic = false;
  int threads = 0;
  bool plots = true;
  std::filesystem::path out_dir;
  AdaptiveSettings adaptive;

  void validate() const;
  ExactSolution solution() const;
  SaddleOptions saddle_options() const;
};

struct LevelResult {
  ErrorReport report;
  SolveReport solve;
  double eta_sum = 0.0;     // sum of eta_K^2
  double eta_global = 0.0;  // the same quantity from global forms
  bool ok = false;
  std::string error;
};

struct PairResult {
  int p = 1;
  int q = 1;
  std::vector<LevelResult> levels;
  std::vector<std::pair<std::string, RateFit>> rates;
};

struct StudyResult {
  std::vector<PairResult> pairs;
  bool any_failure = false;
};

/// Solve one (p, q) pair on one mesh and evaluate all error measures.
LevelResult solve_level(const StudyManifest& m, int p, int q,
                        const std::shared_ptr<const SpacetimeMesh>& mesh, int level);

/// Runs every (p, q) pair over the level range. When out_dir is set, writes
/// ex<N>_p<p>q<q>.csv, rates.csv, solve_reports.jsonl and SVG plots.
StudyResult run_convergence_study(const StudyManifest& m);

struct AdaptiveCycle {
  int cycle = 0;
  int ntri = 0;
  int nvert = 0;
  double h_min = 0.0;
  double eta_total = 0.0;
  double rel_l2_M = 0.0;
  double dual_norm = 0.0;
  bool conforming = true;
  std::vector<int> marked;
};

struct AdaptiveResult {
  std::vector<AdaptiveCycle> cycles;
  std::shared_ptr<const SpacetimeMesh> final_mesh;  // mesh of the last cycle
};

/// Solve, estimate, mark (Doerfler) and bisect for the configured number of
/// cycles, starting from the coarse structured mesh. Cycle k solves on the
/// mesh produced by k refinements; the marks of the last cycle are computed
/// but not applied. Writes adaptive_ex<N>_p<p>q<q>.csv and mesh snapshots
/// when out_dir is set.
AdaptiveResult run_adaptive(const StudyManifest& m, int p, int q);

/// Distance from p to the nearest characteristic line x = +/-x0 +/- t (mod 2)
/// for x0 in {1/3, 1/2, 2/3}.
double characteristic_distance(Point p);

/// Fraction of the given triangles whose centroid lies within factor * h_K of
/// a characteristic line.
double fraction_near_characteristics(const SpacetimeMesh& mesh, std::span<const int> tris,
                                     double factor = 2.0);

/// Rows of a study CSV. Throws Io on malformed input.
std::vector<ErrorReport> read_study_csv(const std::filesystem::path& path);

/// Column values by header name (rel_l2_M, dual_norm, ...).
std::vector<double> column(const std::vector<ErrorReport>& rows, const std::string& metric);

struct PlotSeries {
  std::string label;
  std::vector<double> h;
  std::vector<double> error;
};

/// Log-log error-versus-h chart, one polyline per series, each annotated
/// with its fitted slope. Throws InvalidArgument when there is nothing to plot.
std::string render_loglog_svg(const std::string& title, const std::string& ylabel,
                              const std::vector<PlotSeries>& series);

/// Reads the per-pair CSVs of a finished study and writes one SVG per
/// metric (rel_l2_M and dual_norm). Returns the written paths.
std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir, int example,
                                              const std::vector<std::pair<int, int>>& pairs);

}  // namespace stfem
