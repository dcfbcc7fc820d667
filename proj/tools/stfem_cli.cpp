// Command line driver: convergence studies and adaptive runs.
#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <regex>

#include "stfem/stfem.hpp"

namespace {

std::pair<int, int> parse_levels(const std::string& s) {
  static const std::regex range(R"(^\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*$)");
  std::smatch m;
  if (!std::regex_match(s, m, range)) throw CLI::ValidationError("--levels", "expected a..b, got " + s);
  const int a = std::stoi(m[1]);
  const int b = m[2].matched ? std::stoi(m[2]) : a;
  return {a, b};
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& s) {
  static const std::regex item(R"((\d)\s*[:x]\s*(\d))");
  std::vector<std::pair<int, int>> out;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), item); it != std::sregex_iterator(); ++it) {
    out.emplace_back(std::stoi((*it)[1]), std::stoi((*it)[2]));
  }
  if (out.empty()) throw CLI::ValidationError("--pairs", "expected p:q[,p:q...], got " + s);
  return out;
}

void print_rates(const stfem::StudyResult& r) {
  for (const auto& pr : r.pairs) {
    for (const auto& lr : pr.levels) {
      if (lr.ok) {
        std::printf("P%d x P%d  level %d  h=%.4g  rel_l2_M=%.4e  dual=%.4e  eta=%.4e  (%.2fs)\n",
                    pr.p, pr.q, lr.report.level, lr.report.h, lr.report.rel_l2_M,
                    lr.report.dual_norm, lr.report.eta_total, lr.solve.seconds);
      } else {
        std::printf("P%d x P%d  level %d  FAILED: %s\n", pr.p, pr.q, lr.report.level, lr.error.c_str());
      }
    }
    for (const auto& [metric, fit] : pr.rates) {
      if (metric == "rel_l2_M" || metric == "dual_norm") {
        std::printf("P%d x P%d  %-10s tau=%.3f beta=%.3g r2=%.4f\n", pr.p, pr.q, metric.c_str(),
                    fit.tau, fit.beta, fit.r2);
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spacetime finite element data assimilation for the 1D wave equation"};
  app.set_config("--config", "", "TOML/INI file with option=value lines");

  stfem::StudyManifest m;
  int p = 1, q = 1;
  std::string pairs, levels = "0..3", primal = "residual-jump", dual = "gradient", pattern = "crisscross";
  std::string out = "stfem_out";
  bool adaptive = false, no_plot = false;

  app.add_option("--example", m.example, "1 (smooth) or 2 (Fourier series)")->check(CLI::IsMember({1, 2}));
  app.add_option("--p", p, "primal degree")->check(CLI::Range(1, 3));
  app.add_option("--q", q, "dual degree")->check(CLI::Range(1, 3));
  app.add_option("--pairs", pairs, "several degree pairs, e.g. 1:1,2:1,3:1 (overrides --p/--q)");
  app.add_option("--gamma", m.gamma, "primal stabilization weight");
  app.add_option("--gamma-star", m.gamma_star, "dual stabilization weight");
  app.add_option("--levels", levels, "mesh level range a..b (0 is coarsest)");
  app.add_option("--stab-primal", primal)->check(CLI::IsMember({"residual-jump", "face-only"}));
  app.add_option("--stab-dual", dual)->check(CLI::IsMember({"gradient", "residual"}));
  app.add_option("--mesh-pattern", pattern)->check(CLI::IsMember({"diagonal", "crisscross"}));
  app.add_flag("--adaptive", adaptive, "run estimator-driven refinement instead of the ladder");
  app.add_option("--cycles", m.adaptive.cycles, "adaptive cycles")->check(CLI::NonNegativeNumber);
  app.add_option("--theta", m.adaptive.theta, "Doerfler fraction")->check(CLI::Range(0.0, 1.0));
  app.add_option("--k-max", m.k_max, "series truncation for example 2")->check(CLI::PositiveNumber);
  app.add_option("--threads", m.threads, "assembly threads (0 = all cores)");
  app.add_option("--out", out, "output directory");
  app.add_flag("--allow-locking", m.allow_locking, "accept q > p");
  app.add_flag("--allow-unstable", m.allow_unstable, "accept gamma = 0 or gamma* = 0");
  app.add_flag("--deep", m.deep, "include the finest mesh level");
  app.add_flag("--deterministic", m.deterministic,
               "single-threaded assembly and zero timings for byte-identical output");
  app.add_flag("--no-plot", no_plot, "skip SVG output");
  CLI11_PARSE(app, argc, argv);

  try {
    m.pairs = pairs.empty() ? std::vector<std::pair<int, int>>{{p, q}} : parse_pairs(pairs);
    std::tie(m.level_lo, m.level_hi) = parse_levels(levels);
    m.variant.primal = primal == "face-only" ? stfem::PrimalStab::FaceOnly : stfem::PrimalStab::ResidualJump;
    m.variant.dual = dual == "residual" ? stfem::DualStab::ResidualStyle : stfem::DualStab::GradientPenalty;
    m.pattern = pattern == "crisscross" ? stfem::SplitPattern::Crisscross : stfem::SplitPattern::Diagonal;
    m.out_dir = out;
    m.plots = !no_plot;
    m.adaptive.enabled = adaptive;
    m.validate();

    if (adaptive) {
      int status = 0;
      for (auto [pp, qq] : m.pairs) {
        try {
          const auto r = stfem::run_adaptive(m, pp, qq);
          for (const auto& c : r.cycles) {
            std::printf("P%d x P%d  cycle %d  ntri=%d  h_min=%.3g  eta=%.4e  rel_l2_M=%.4e\n", pp, qq,
                        c.cycle, c.ntri, c.h_min, c.eta_total, c.rel_l2_M);
          }
          if (!r.cycles.empty()) {
            std::printf("marked near characteristics: %.1f%%\n",
                        100.0 * stfem::fraction_near_characteristics(*r.final_mesh,
                                                                     r.cycles.back().marked));
          }
        } catch (const stfem::Error& e) {
          std::fprintf(stderr, "P%d x P%d adaptive run failed: %s\n", pp, qq, e.what());
          status = 2;
        }
      }
      return status;
    }

    const auto result = stfem::run_convergence_study(m);
    print_rates(result);
    std::printf("results written to %s\n", m.out_dir.string().c_str());
    return result.any_failure ? 2 : 0;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const stfem::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
