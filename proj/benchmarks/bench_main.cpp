#include <benchmark/benchmark.h>

#include <annfolio/baselines.hpp>
#include <annfolio/evaluation.hpp>
#include <annfolio/objective.hpp>
#include <annfolio/policy_net.hpp>
#include <annfolio/rng.hpp>

using namespace annfolio;

namespace {

Scenario heston(std::size_t steps) {
  InitialConditions init;
  init.y0 = 0.0155;
  return {MarketParams::heston(0.05, 0.089, 10.5, 0.0438, 0.564, -0.712), make_time_grid(1.0, steps), init};
}

void BM_Forward(benchmark::State& st) {
  const PolicyParams theta = init_params(Architecture({2, static_cast<std::size_t>(st.range(0)), 1}), 0.1, 1);
  double t = 0.0;
  for (auto _ : st) {
    benchmark::DoNotOptimize(forward(theta, t, 0.04, 1.0));
    t += 1e-6;
  }
}
BENCHMARK(BM_Forward)->Arg(3)->Arg(5)->Arg(32);

// one path per iteration, so items/s reads as paths/s
void BM_Rollout(benchmark::State& st) {
  const Scenario s = heston(static_cast<std::size_t>(st.range(0)));
  const Policy p = Policy::ann(init_params(Architecture({2, 5, 1}), 0.1, 2));
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(simulate_batch(s, p.bind(s), 1, ++seed).terminal_wealth[0]);
  st.SetItemsProcessed(st.iterations());
}
BENCHMARK(BM_Rollout)->Arg(252)->Arg(2142)->Unit(benchmark::kMicrosecond);

void BM_Gradient(benchmark::State& st) {
  const Scenario s = heston(static_cast<std::size_t>(st.range(0)));
  const PolicyParams theta = init_params(Architecture({2, 5, 1}), 0.1, 3);
  const NoiseBatch noise = NoiseBatch::generate(7, 10, s.grid.steps(), s.params.rho(), s.grid.dt());
  for (auto _ : st) benchmark::DoNotOptimize(batch_utility_gradient(theta, s, UtilitySpec{1.0}, noise).J);
  st.SetItemsProcessed(st.iterations() * 10);
}
BENCHMARK(BM_Gradient)->Arg(252)->Arg(2142)->Unit(benchmark::kMillisecond);

void BM_NoiseBatch(benchmark::State& st) {
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(NoiseBatch::generate(++seed, 50, 252, -0.712, 1.0 / 252).paths());
  st.SetItemsProcessed(st.iterations() * 50 * 252);
}
BENCHMARK(BM_NoiseBatch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
