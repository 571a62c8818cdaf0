#include <benchmark/benchmark.h>

#include "vigilkit/ica.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;

// 64 channels, 4 Laplacian sources, 150 s at 256 Hz.
static void BM_InfomaxMixture(benchmark::State& state) {
  const auto mix = synth::laplacian_mixture(64, 4, 150 * 256, 0.05, 1);
  ica::IcaOptions opt;
  opt.n_components = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ica::infomax(mix.data, opt));
}
BENCHMARK(BM_InfomaxMixture)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
