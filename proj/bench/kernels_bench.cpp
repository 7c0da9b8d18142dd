// Serial reference vs OpenMP kernels. Each benchmark takes the execution
// policy as its argument: 0 = serial, 1 = parallel.

#include <cmath>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "capcover/bang.hpp"
#include "capcover/generators.hpp"
#include "capcover/oracle.hpp"
#include "capcover/separability.hpp"

namespace cc = capcover;

namespace {

cc::Exec policy(const benchmark::State& state) {
  return state.range(0) == 0 ? cc::Exec::serial : cc::Exec::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}

void BM_PatternSearch(benchmark::State& state) {
  const cc::Instance inst = cc::gen_chain(3, 14, std::vector<double>{0.1}, 0.1, 3);
  cc::SolverParams p;
  p.overlap_shortcut = false;
  p.exec = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(cc::check_nonseparable(inst, p));
  label(state);
}

void BM_MaxNormSigning(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::vector<cc::PlankVector> vs;
  for (int i = 0; i < 20; ++i) {
    vs.push_back({std::sin(0.05) * cc::random_unit_vector(4, rng)});
  }
  cc::SigningConfig cfg;
  cfg.exec = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(cc::max_norm_signing(vs, {}, cfg));
  label(state);
}

void BM_SampledContainment(benchmark::State& state) {
  const cc::Cap outer{cc::Vector::Unit(3, 0), 0.6};
  cc::Vector c(3);
  c << std::cos(0.19), std::sin(0.19), 0.0;
  const cc::Cap inner{c, 0.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        cc::sampled_containment(outer, inner, 200000, 1, policy(state)));
  }
  label(state);
}

void BM_GridSeparability(benchmark::State& state) {
  const cc::Instance inst = cc::gen_chain(2, 5, std::vector<double>{0.2}, 0.2, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cc::grid_separability(inst, 1000000, policy(state)));
  }
  label(state);
}

void BM_Lemma7(benchmark::State& state) {
  cc::Lemma7Options o;
  o.families = 100;
  o.samples_per_family = 100;
  o.seed = 2;
  o.exec = policy(state);
  for (auto _ : state) benchmark::DoNotOptimize(cc::lemma7_harness(o));
  label(state);
}

}  // namespace

BENCHMARK(BM_PatternSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxNormSigning)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampledContainment)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridSeparability)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lemma7)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
