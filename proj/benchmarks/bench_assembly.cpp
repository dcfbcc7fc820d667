#include <benchmark/benchmark.h>

#include "stfem/stfem.hpp"

namespace {

std::shared_ptr<const stfem::SpacetimeMesh> ladder_mesh(int level) {
  const auto spec = stfem::level_ladder(stfem::SplitPattern::Diagonal, true).at(level);
  return std::make_shared<const stfem::SpacetimeMesh>(
      stfem::build_structured(spec.nx, spec.nt, 2.0, {0.1, 0.3}, stfem::SplitPattern::Diagonal));
}

void BM_PrimalStabilizer(benchmark::State& state) {
  const auto mesh = ladder_mesh(static_cast<int>(state.range(0)));
  const auto space = std::make_shared<const stfem::FESpace>(mesh, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    auto s = stfem::assemble_primal_stabilizer(space, stfem::PrimalStab::ResidualJump, 0,
                                               static_cast<int>(state.range(2)));
    benchmark::DoNotOptimize(s.matrix.nonZeros());
  }
  state.counters["dofs"] = space->dof_count();
}
BENCHMARK(BM_PrimalStabilizer)
    ->ArgsProduct({{1, 2}, {1, 2, 3}, {1, 0}})
    ->ArgNames({"level", "p", "threads"})
    ->Unit(benchmark::kMillisecond);

void BM_WaveForm(benchmark::State& state) {
  const auto mesh = ladder_mesh(static_cast<int>(state.range(0)));
  const auto vp = std::make_shared<const stfem::FESpace>(mesh, static_cast<int>(state.range(1)));
  const auto vq = std::make_shared<const stfem::FESpace>(mesh, 1);
  for (auto _ : state) {
    auto b = stfem::assemble_wave_form(vp, vq);
    benchmark::DoNotOptimize(b.matrix.nonZeros());
  }
}
BENCHMARK(BM_WaveForm)->ArgsProduct({{1, 2}, {1, 2, 3}})->Unit(benchmark::kMillisecond);

// Build plus factorization, the Table-2-style cost ordering across (p,q).
void BM_SolveLevel(benchmark::State& state) {
  const auto mesh = ladder_mesh(static_cast<int>(state.range(0)));
  const auto vp = std::make_shared<const stfem::FESpace>(mesh, static_cast<int>(state.range(1)));
  const auto vq = std::make_shared<const stfem::FESpace>(mesh, static_cast<int>(state.range(2)));
  const auto data = stfem::make_observation(stfem::example1(), {0.1, 0.3});
  for (auto _ : state) {
    const auto sys = stfem::build_system(vp, vq, data);
    auto sol = stfem::solve(sys);
    benchmark::DoNotOptimize(sol.u.coeffs.data());
  }
  state.counters["unknowns"] = vp->dof_count() + vq->dof_count();
}
BENCHMARK(BM_SolveLevel)
    ->Args({2, 1, 1})
    ->Args({2, 2, 1})
    ->Args({2, 2, 2})
    ->Args({2, 3, 1})
    ->Args({2, 3, 2})
    ->Args({2, 3, 3})
    ->Unit(benchmark::kMillisecond);

void BM_EtaIndicators(benchmark::State& state) {
  const auto mesh = ladder_mesh(static_cast<int>(state.range(0)));
  const auto vp = std::make_shared<const stfem::FESpace>(mesh, 2);
  const auto vq = std::make_shared<const stfem::FESpace>(mesh, 1);
  const auto data = stfem::make_observation(stfem::example1(), {0.1, 0.3});
  const auto sol = stfem::solve(stfem::build_system(vp, vq, data));
  for (auto _ : state) {
    auto eta = stfem::eta_indicators(sol.u, sol.z, data);
    benchmark::DoNotOptimize(eta.eta2.data());
  }
}
BENCHMARK(BM_EtaIndicators)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
