#include <benchmark/benchmark.h>

#include <array>
#include <random>

#include "cvarsafe/cvar.hpp"
#include "cvarsafe/policy_runtime.hpp"
#include "cvarsafe/risk_solver.hpp"
#include "cvarsafe/stormwater.hpp"
#include "cvarsafe/value_iteration.hpp"

using namespace cvarsafe;

namespace {

stormwater::StormwaterModel baseline() {
  return {stormwater::StormwaterParams::for_design(stormwater::Design::a),
          stormwater::smoke_runoff()};
}

AugmentedGrid grid_for(const SystemModel& m, std::size_t n) {
  const std::vector<std::size_t> counts{n, n};
  return AugmentedGrid::uniform(m, counts, 11, 11, 21);
}

void BM_CvarDual(benchmark::State& state) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> v(0.0, 10.0);
  std::vector<ProbabilityMassFunction::Atom> atoms(static_cast<std::size_t>(state.range(0)));
  for (auto& a : atoms) a = {v(gen), 1.0 / double(atoms.size())};
  const auto p = ProbabilityMassFunction::from_atoms(atoms);
  for (auto _ : state) benchmark::DoNotOptimize(cvar_dual(p, RiskLevel(0.05)));
}
BENCHMARK(BM_CvarDual)->Arg(8)->Arg(64)->Arg(512);

void BM_ValueIteration(benchmark::State& state) {
  const auto m = baseline();
  const auto g = grid_for(m, static_cast<std::size_t>(state.range(0)));
  const TransitionCache cache(m, g);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(1.0, m, g, cache));
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.x_count() * g.z_axis.size()));
}
BENCHMARK(BM_ValueIteration)->Arg(13)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_Sweep(benchmark::State& state) {
  const auto m = baseline();
  const auto g = grid_for(m, 25);
  for (auto _ : state) benchmark::DoNotOptimize(sweep(m, g));
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);

void BM_Rollout(benchmark::State& state) {
  const auto m = baseline();
  const auto g = grid_for(m, 25);
  const auto sw = sweep(m, g);
  const std::array<double, 2> x0{2.0, 2.0};
  const auto p = synthesize_policy(x0, RiskLevel(0.05), sw, m, g);
  for (auto _ : state) benchmark::DoNotOptimize(rollout(p, m, {1000, 7, 1, false, false}));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_Rollout)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
