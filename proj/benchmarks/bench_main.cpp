#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "bdm/bdm.hpp"

namespace {

std::vector<double> random_state(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = u(rng) * std::exp(-static_cast<double>(i) / 50.0);
  return c;
}

void BM_Rhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rates = bdm::tabulate_rates(bdm::make_power_law_model(0.5, 1.0, 1.0, 0.5), n);
  const auto c = random_state(n);
  std::vector<double> f(n), w(n);
  for (auto _ : state) {
    bdm::rhs(c, rates, f, w);
    benchmark::DoNotOptimize(f.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rhs)->RangeMultiplier(10)->Range(100, 100000);

void BM_TailTransform(benchmark::State& state) {
  const auto c = random_state(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto g = bdm::tail_density(c);
    benchmark::DoNotOptimize(g.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TailTransform)->RangeMultiplier(10)->Range(100, 100000);

void BM_TailRhs(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto rates = bdm::tabulate_rates(bdm::make_power_law_model(0.5, 1.0, 1.0, 0.5), n);
  const auto c = random_state(n);
  const auto g = bdm::tail_density(c);
  for (auto _ : state) {
    auto f = bdm::tail_rhs(g, c[0], rates);
    benchmark::DoNotOptimize(f.data());
  }
}
BENCHMARK(BM_TailRhs)->Arg(2000)->Arg(20000);

void BM_SupersolutionBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = bdm::make_power_law_model(0.5, 1.0, 1.0, 0.5);
  auto c = random_state(n);
  for (std::size_t i = n / 2; i < n; ++i) c[i] = 0.0;
  auto g = bdm::tail_density(c);
  const double g1 = g[0];
  for (double& v : g) v /= g1;
  const auto params = bdm::make_supersolution_params(model, 0.6, 1.0, 1.0, n);
  for (auto _ : state) {
    auto sup = bdm::build_supersolution(model, params, g);
    benchmark::DoNotOptimize(sup.r.data());
  }
}
BENCHMARK(BM_SupersolutionBuild)->Arg(2000)->Arg(20000);

void BM_EquilibriumSolve(benchmark::State& state) {
  const auto model = bdm::make_exponential_tail_model(0.5, 1.0, 1.0, 0.5);
  for (auto _ : state) {
    auto eq = bdm::compute_equilibrium(model, 0.5, 2000);
    benchmark::DoNotOptimize(eq.z_bar);
  }
}
BENCHMARK(BM_EquilibriumSolve)->Unit(benchmark::kMillisecond);

void BM_ShortIntegration(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto model = bdm::make_power_law_model(0.5, 1.0, 1.0, 0.5);
  bdm::ClusterState s;
  s.c.assign(n, 0.0);
  s.c[0] = 1.0;
  bdm::IntegrateOptions opts;
  opts.keep_states = false;
  for (auto _ : state) {
    auto traj = bdm::integrate(s, model, 1.0, opts);
    benchmark::DoNotOptimize(traj.stats.accepted);
  }
}
BENCHMARK(BM_ShortIntegration)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
