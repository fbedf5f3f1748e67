#include <benchmark/benchmark.h>

#include "qtomo/chi2.hpp"
#include "qtomo/diagnostics.hpp"
#include "qtomo/linalg.hpp"

using namespace qtomo;

static void BM_HermitianEig(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng(1);
  const ComplexMatrix m = rank_biased_random(d, rng).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(eig_hermitian(m));
}
BENCHMARK(BM_HermitianEig)->Arg(2)->Arg(4)->Arg(8);

static void BM_Mle(benchmark::State& state, const char* set_name) {
  const ProjectorSet set = named_set(set_name);
  Rng rng(2);
  std::vector<CountDataset> data;
  for (int i = 0; i < 64; ++i) data.push_back(simulate_dataset(rank_biased_random(set.dim(), rng), set, 2000, {}, rng));
  size_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mle_reconstruct(data[k++ % data.size()], set));
}
BENCHMARK_CAPTURE(BM_Mle, qubit_cube, "cube");
BENCHMARK_CAPTURE(BM_Mle, two_qubit_cube, "cube^2");

static void BM_MonteCarloWeights(benchmark::State& state) {
  const ProjectorSet set = named_set("cube^2");
  Rng rng(3);
  const CountDataset data = simulate_dataset(rank_biased_random(4, rng), set, 2000, {}, rng);
  const ReconstructionResult r = mle_reconstruct(data, set);
  McOptions opts;
  opts.samples = 100;
  for (auto _ : state) benchmark::DoNotOptimize(mc_chibar_weights(r, set, opts));
}
BENCHMARK(BM_MonteCarloWeights)->Unit(benchmark::kMillisecond);

static void BM_Chi2Quantile(benchmark::State& state) {
  double p = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chi2_quantile(p, 20.0));
    p = p > 0.98 ? 0.01 : p + 0.0137;
  }
}
BENCHMARK(BM_Chi2Quantile);

static void BM_Poisson(benchmark::State& state) {
  const double lambda = static_cast<double>(state.range(0));
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_poisson(lambda, rng));
}
BENCHMARK(BM_Poisson)->Arg(3)->Arg(100)->Arg(2000);
BENCHMARK_MAIN();
