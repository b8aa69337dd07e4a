#include <benchmark/benchmark.h>
#include <tbb/global_control.h>

#include "dosp/dynamics.hpp"
#include "dosp/metrics.hpp"
#include "dosp/oracle.hpp"
#include "dosp/scenarios.hpp"

using namespace dosp;

namespace {

ProblemSpec tracking(std::size_t agents, double horizon) {
  QuadraticTrackingParams q;
  q.common.agents = agents;
  q.common.horizon = horizon;
  q.common.step = 0.01;
  return make_scenario("quadratic_tracking", q, 1).problem;
}

ProblemSpec classifier(std::size_t agents) {
  ClassifierParams c;
  c.common.agents = agents;
  c.common.dim = 16;
  c.common.gamma = 10.0;
  c.common.box_half_width = 5.0;
  c.common.horizon = 10.0;
  c.common.step = 0.02;
  c.holdout_size = 10;
  return make_scenario("sparse_classifier_synthetic", c, 1).problem;
}

void BM_StepTracking(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto p = tracking(n, 10.0);
  Graph g = make_cycle(n);
  EngineConfig cfg;
  cfg.step = 0.01;
  cfg.horizon = 10.0;
  SystemState s = initial_state(p, g);
  for (auto _ : st) {
    s.t = 0.0;
    benchmark::DoNotOptimize(step(s, p, g, cfg));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_StepTracking)->Arg(4)->Arg(32)->Arg(256);

void BM_StepClassifier(benchmark::State& st) {
  const auto workers = static_cast<std::size_t>(st.range(0));
  auto p = classifier(20);
  Graph g = make_random_geometric(20, 0.4, 3);
  EngineConfig cfg;
  cfg.step = 0.02;
  cfg.horizon = 10.0;
  cfg.workers = workers;
  SystemState s = initial_state(p, g);
  for (auto _ : st) {
    s.t = 1.0;
    benchmark::DoNotOptimize(step(s, p, g, cfg));
  }
}
BENCHMARK(BM_StepClassifier)->Arg(1)->Arg(4);

void BM_Accumulate(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto p = tracking(n, 10.0);
  Graph g = make_cycle(n);
  EngineConfig cfg;
  cfg.step = 0.01;
  cfg.horizon = 10.0;
  TrajectoryLog log(p, cfg, {}, std::nullopt);
  RunningIntegrals acc = log.zero_integrals();
  SystemState s = initial_state(p, g);
  for (auto _ : st) {
    accumulate(acc, s, p, log, 0.01);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Accumulate)->Arg(4)->Arg(32);

void BM_GridOracle(benchmark::State& st) {
  auto p = tracking(4, 2.0);
  const auto res = static_cast<std::size_t>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(grid_oracle(p, res));
}
BENCHMARK(BM_GridOracle)->Arg(21)->Arg(41)->Unit(benchmark::kMillisecond);

void BM_SubgradientOracle(benchmark::State& st) {
  auto p = tracking(4, 2.0);
  for (auto _ : st) benchmark::DoNotOptimize(subgradient_oracle(p, 200));
}
BENCHMARK(BM_SubgradientOracle)->Unit(benchmark::kMillisecond);

}  // namespace
int main(int argc, char** argv) {
  // Allow more workers than cores so the multi-worker cases run everywhere.
  tbb::global_control gc(tbb::global_control::max_allowed_parallelism, 8);
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
