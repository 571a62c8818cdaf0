#include <benchmark/benchmark.h>

#include <numeric>

#include "vigilkit/relevance.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;

static synth::Cohort cohort() {
  synth::PlantSpec plant;
  plant.planted = {{"LP", "alpha1", 1.0}, {"LT", "gamma2", 1.0}};
  return synth::gen_cohort(plant, 7);
}

static void BM_Screen(benchmark::State& state) {
  const auto c = cohort();
  for (auto _ : state) benchmark::DoNotOptimize(relevance::screen_features(c.data, 0.1));
}
BENCHMARK(BM_Screen)->Unit(benchmark::kMillisecond);

// Exhaustive subset search over the first n features, 500 permutations each.
static void BM_MvpaSearch(benchmark::State& state) {
  const auto c = cohort();
  std::vector<int> screened(static_cast<std::size_t>(state.range(0)));
  std::iota(screened.begin(), screened.end(), 0);
  relevance::MvpaOptions opt;
  opt.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(relevance::mvpa_search(c.data, screened, opt));
}
BENCHMARK(BM_MvpaSearch)->Args({6, 1})->Args({8, 1})->Args({8, 4})->Unit(benchmark::kMillisecond);
