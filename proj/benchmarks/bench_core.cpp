#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "koopgen/koopgen.hpp"

namespace {

using namespace koopgen;

void BM_GlRule(benchmark::State& state) {
  const int gamma_count = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gl_rule(1.0, gamma_count));
}
BENCHMARK(BM_GlRule)->Arg(10)->Arg(50)->Arg(100)->Arg(1000);

void BM_IntegrateLorenz63(benchmark::State& state) {
  const SystemSpec spec = builtin_system("lorenz63_scaled");
  const std::vector<double> x0(3, 0.05);
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(0.01 * k);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(spec, x0, times));
}
BENCHMARK(BM_IntegrateLorenz63);

struct VdpData {
  SnapshotDataset data;
  std::shared_ptr<const Dictionary> dict;
};

VdpData vdp_data(int M, int gamma_count) {
  const SystemSpec spec = builtin_system("vdp");
  const Matrix x0 = sample_initial_conditions(spec.domain, static_cast<std::size_t>(M), 1);
  return {generate_dataset(spec, x0, 1.0, gamma_count),
          std::make_shared<const Dictionary>(Dictionary::monomial_per_axis({3, 3}))};
}

void BM_Assemble(benchmark::State& state) {
  const VdpData v = vdp_data(static_cast<int>(state.range(0)), 50);
  RtmConfig cfg;
  cfg.gamma_count = 50;
  for (auto _ : state) benchmark::DoNotOptimize(assemble(v.data, *v.dict, cfg));
}
BENCHMARK(BM_Assemble)->Arg(100)->Arg(1000);

void BM_Learn(benchmark::State& state) {
  const VdpData v = vdp_data(static_cast<int>(state.range(0)), 50);
  RtmConfig cfg;
  cfg.gamma_count = 50;
  for (auto _ : state) benchmark::DoNotOptimize(learn(v.data, v.dict, cfg));
}
BENCHMARK(BM_Learn)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
