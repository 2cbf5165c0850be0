#include <benchmark/benchmark.h>

#include "diamond/parallel.hpp"
#include "diamond/timeloop.hpp"

using namespace diamond;

namespace {

// One interior sine-Gordon diamond taken from the breather's Cauchy data.
void BM_SolveDiamond(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const WaveProblem p = sample_problem("SineGordon");
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 1000, 0.05 / 0.06, 0.05);
  const RKTableau tab = gauss_tableau(r);
  const ZigZagState z = init_exact(p, mesh, tab);
  const PDESystem pde = wave_system(p);
  const TransformedCoeffs coeffs = transform_coeffs(pde, mesh.dx, mesh.dt);
  const SolverConfig cfg;
  const int k = mesh.N / 2;
  for (auto _ : state) {
    DiamondSolution s = solve_diamond(z.edges[2 * k - 1], z.edges[2 * k], pde, tab, coeffs, cfg);
    benchmark::DoNotOptimize(s.top.values.data());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SolveDiamond)->DenseRange(1, 5);

void BM_HalfStep(benchmark::State& state) {
  const int r = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  const WaveProblem p = sample_problem("SineGordon");
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, N, 0.5, 1.0);
  const RKTableau tab = gauss_tableau(r);
  const SchemeContext ctx(p, mesh, tab, boundary_from_problem(p), SolverConfig{});
  const ZigZagState z = init_exact(p, mesh, tab);
  for (auto _ : state) {
    ZigZagState next = half_step(ctx, z);
    benchmark::DoNotOptimize(next.edges.data());
  }
  state.SetItemsProcessed(state.iterations() * N);
}
BENCHMARK(BM_HalfStep)->Args({2, 100})->Args({5, 100})->Unit(benchmark::kMicrosecond);

void BM_ParallelRun(benchmark::State& state) {
  const int workers = static_cast<int>(state.range(0));
  const WaveProblem p = sample_problem("SineGordon");
  const MeshConfig mesh = MeshConfig::make(p.a, p.b, 400, 0.5, 20 * 0.5 * 60.0 / 400);
  const RKTableau tab = gauss_tableau(3);
  const BoundarySpec bc = boundary_from_problem(p);
  for (auto _ : state) {
    RunReport rep = parallel_run(p, mesh, tab, bc, SolverConfig{}, {}, workers);
    benchmark::DoNotOptimize(rep.final_state.edges.data());
  }
}
BENCHMARK(BM_ParallelRun)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
