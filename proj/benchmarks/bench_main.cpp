#include <benchmark/benchmark.h>

#include "apg/aggregate.hpp"
#include "apg/estimator.hpp"
#include "apg/mdp.hpp"
#include "apg/nigt.hpp"

namespace {

using namespace apg;

void BM_SampleTrajectory(benchmark::State& state) {
  const MdpSpec spec = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(spec);
  const auto H = static_cast<std::size_t>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    RandomStream stream(1, 0, i++);
    benchmark::DoNotOptimize(sample_trajectory(spec, p, H, stream));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(H));
}
BENCHMARK(BM_SampleTrajectory)->Arg(5)->Arg(20)->Arg(100);

void BM_EstimateGH(benchmark::State& state) {
  const MdpSpec spec = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(spec);
  RandomStream stream(1, 0, 0);
  const Trajectory t = sample_trajectory(spec, p, static_cast<std::size_t>(state.range(0)), stream);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_gH(t, p, spec.gamma));
}
BENCHMARK(BM_EstimateGH)->Arg(5)->Arg(20)->Arg(100);

void BM_EnumerateJH(benchmark::State& state) {
  const MdpSpec spec = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(spec);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_JH(spec, p, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_EnumerateJH)->DenseRange(2, 8, 2);

void BM_ExactOracle(benchmark::State& state) {
  const MdpSpec spec = benchmark_mdp();
  const PolicyParams p = PolicyParams::zeros(spec);
  for (auto _ : state) benchmark::DoNotOptimize(exact_J(spec, p));
}
BENCHMARK(BM_ExactOracle);

void BM_RennalaRound(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) steps[i] = 0.1 * static_cast<double>(i + 1);
  AggregationContext ctx = AggregationContext::homogeneous(benchmark_mdp(), TimeModel::from_steps(steps, 1.0), 3);
  const PolicyParams p = PolicyParams::zeros(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_rennala(ctx, p, 32, 20));
  state.SetItemsProcessed(state.iterations() * 32);
}
BENCHMARK(BM_RennalaRound)->Arg(1)->Arg(8)->Arg(64);

void BM_MaleniaRoundTimingOnly(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) steps[i] = 0.1 * static_cast<double>(i + 1);
  AggregationContext ctx = AggregationContext::homogeneous(benchmark_mdp(), TimeModel::from_steps(steps, 1.0), 3);
  ctx.timing_only = true;
  const PolicyParams p = PolicyParams::zeros(2, 2);
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_malenia(ctx, p, 32, 20));
}
BENCHMARK(BM_MaleniaRoundTimingOnly)->Arg(1)->Arg(8)->Arg(64);

void BM_RunMethod(benchmark::State& state) {
  MethodConfig c;
  c.kind = MethodKind::kRennalaNigt;
  c.envs = {benchmark_mdp()};
  c.time = TimeModel::uniform(4, 0.05);
  c.schedule = Schedule{0.1, 0.05, 20, 20, 20, 0.05};
  c.iterations = 50;
  for (auto _ : state) benchmark::DoNotOptimize(run_method(c));
}
BENCHMARK(BM_RunMethod)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
