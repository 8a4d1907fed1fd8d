#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "mcconc/constants.hpp"
#include "mcconc/estimators.hpp"
#include "mcconc/splitting.hpp"
#include "mcconc/worked_examples.hpp"

using namespace mcconc;

static void BM_GeometricStep(benchmark::State& state) {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  RandomStream rng(1);
  std::int64_t x = 0;
  for (auto _ : state) {
    x = ex.chain.step(x, rng);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_GeometricStep);

static void BM_RealLineStep(benchmark::State& state) {
  const LogConcaveExample ex =
      logconcave_example(SymmetricProposal::laplace(1.0), SymmetricTarget::gaussian(1.0), 3.0);
  RandomStream rng(1);
  double x = 0.0;
  for (auto _ : state) {
    x = ex.chain.step(x, rng);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_RealLineStep);

static void BM_SplitSimulation(benchmark::State& state) {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomStream rng(2);
  for (auto _ : state) {
    auto traj = simulate_regenerative(ex.chain, n, 0, rng);
    benchmark::DoNotOptimize(traj.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SplitSimulation)->Arg(1 << 10)->Arg(1 << 14);

static void BM_RealLineSplitSimulation(benchmark::State& state) {
  const LogConcaveExample ex =
      logconcave_example(SymmetricProposal::laplace(1.0), SymmetricTarget::gaussian(1.0), 3.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomStream rng(3);
  for (auto _ : state) {
    auto traj = simulate_regenerative(ex.chain, n, 0.0, rng);
    benchmark::DoNotOptimize(traj.states.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RealLineSplitSimulation)->Arg(1 << 12);

static void BM_DriftBoundCurve(benchmark::State& state) {
  const GeometricExample ex = geometric_example(0.5, 1.2);
  DriftBoundInputs in;
  in.cert = &ex.cert;
  in.delta = ex.delta;
  in.pi_C = ex.pi_C;
  in.kappa = 1.0 / std::log(1.2);
  in.V_x = ex.cert.V(0);
  in.n = 1 << 14;
  const TailBoundCurve curve = drift_bound(in).curve;
  double t = 1e8;
  for (auto _ : state) {
    benchmark::DoNotOptimize(curve.evaluate(t));
    t *= 1.0000001;
  }
}
BENCHMARK(BM_DriftBoundCurve);

static void BM_LogConcaveQuadrature(benchmark::State& state) {
  const SymmetricProposal q = SymmetricProposal::laplace(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(logconcave_drift_constants(q, 3.0));
}
BENCHMARK(BM_LogConcaveQuadrature);

static void BM_SolveR(benchmark::State& state) {
  double delta = 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_r(delta));
    delta = delta < 0.9 ? delta + 1e-6 : 0.3;
  }
}
BENCHMARK(BM_SolveR);

static void BM_PsiOneEstimate(benchmark::State& state) {
  RandomStream rng(4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = rng.exponential();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_psi_alpha(x, 1.0));
}
BENCHMARK(BM_PsiOneEstimate)->Arg(1 << 16);

BENCHMARK_MAIN();
