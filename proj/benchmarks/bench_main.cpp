#include <benchmark/benchmark.h>

#include "bsde/bsde_approx.hpp"
#include "bsde/experiment.hpp"
#include "bsde/model.hpp"
#include "bsde/pde.hpp"
#include "bsde/random.hpp"
#include "bsde/value_function.hpp"

namespace {

using namespace bsde;

LinearModelSpec linear_spec(TerminalFunction phi) {
  LinearModelSpec s;
  s.beta = 0.1;
  s.gamma = 0.2;
  s.terminal = std::move(phi);
  return s;
}

void BM_BrownianIncrements(benchmark::State& state) {
  const TimeGrid grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  std::uint64_t stream = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(NoiseSource{1, stream++}.brownian_increments(grid));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BrownianIncrements)->Arg(1000)->Arg(10000);

void BM_LinearValueFunction(benchmark::State& state) {
  const LinearModelSpec spec = linear_spec(terminal_sine());
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(linear_u(spec, 0.05, 0.5, x, 1.0));
    x += 1e-6;
  }
}
BENCHMARK(BM_LinearValueFunction);

void BM_PdeSolve(benchmark::State& state) {
  const LinearModelSpec spec = linear_spec(terminal_sine());
  const PdeProblem problem = linear_pde_problem(spec);
  const PdeGrid grid{-1.5, 2.4, static_cast<std::size_t>(state.range(0)), 200, 1.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_semilinear_pde(problem, 0.5, 0.1, grid));
  }
}
BENCHMARK(BM_PdeSolve)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ApproximateReplication(benchmark::State& state) {
  const LinearModelSpec spec = linear_spec(terminal_square());
  const ModelSpec model = spec.forward_model();
  const LinearValueFunction vf(spec, 0.05);
  const TimeGrid grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const EstimationWindow window{0.1};
  std::uint64_t stream = 0;
  for (auto _ : state) {
    const ForwardPaths p = simulate_forward(model, 1.0, 0.05, grid, NoiseSource{2, stream++});
    benchmark::DoNotOptimize(approximate_bsde(model, vf, p.X, p.W, window, 0.05, 1.0));
  }
}
BENCHMARK(BM_ApproximateReplication)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_MonteCarlo(benchmark::State& state) {
  ExperimentConfig c;
  c.n_replications = 100;
  c.workers = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_monte_carlo(c));
  }
}
BENCHMARK(BM_MonteCarlo)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
