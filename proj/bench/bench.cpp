// Serial reference vs OpenMP kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "hyperrate/oracle.hpp"
#include "hyperrate/solver.hpp"
#include "../tests/support/generators.hpp"

using namespace hyperrate;

namespace {

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(0) ? ExecutionPolicy::parallel : ExecutionPolicy::serial;
}

ProblemInstance wide_side_info() {
  gen::Rng rng(11);
  return gen::side_info(rng, 6, 3, 1, 1.0, 0.0, 4);
}

void BM_SideInfoEnumeration(benchmark::State& state) {
  auto inst = wide_side_info();
  SolverOptions o;
  o.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(rate_side_info(inst, inst.tolerance(), o).rate);
}

void BM_GridRate(benchmark::State& state) {
  JointPmf pmf({numbered_alphabet("X", 1, 6)}, std::vector<double>(6, 1.0 / 6));
  auto f = tabulate("f", pmf, {0}, 1, [](std::span<const std::size_t> i) { return std::vector<double>{double(i[0])}; });
  auto inst = make_instance(Setting::p2p, pmf, {f}, {1.0});
  GridSpec g;
  g.m = 120;
  g.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(grid_min_rate(inst, 1.0, g).value);
}

void BM_AuxSearch(benchmark::State& state) {
  gen::Rng rng(3);
  auto inst = gen::distributed(rng, 3, 2, 0.5, 0.0, 2);
  GridSpec g;
  g.m = 8;
  g.policy = policy_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(general_aux_search(inst, 0.5, g).value);
}

}  // namespace

BENCHMARK(BM_SideInfoEnumeration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_GridRate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AuxSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
