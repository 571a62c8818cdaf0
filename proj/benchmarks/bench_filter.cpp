#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "vigilkit/filter.hpp"
#include "vigilkit/signal.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;

static void BM_Filtfilt(benchmark::State& state) {
  const auto f = dsp::butterworth_bandpass(4, 1.0, 70.0, 256.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = g(rng);
  for (auto _ : state) {
    auto y = x;
    f.filtfilt(y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Filtfilt)->Arg(256 * 60)->Arg(256 * 300);

static void BM_BandPowerRatios(benchmark::State& state) {
  synth::RecordingPlant plant;
  plant.rhythms = {{{"LP", "MP", "RP"}, 10.0, 8.0}};
  const auto rec = synth::gen_recording(plant, 60, 256, 1).recording;
  const auto scalp = eeg::regress_out_eog(rec).cleaned;
  const auto bands = eeg::BandSet::defaults();
  const auto rois = eeg::RoiMap::biosemi64();
  for (auto _ : state) benchmark::DoNotOptimize(eeg::band_power_ratios(scalp, bands, rois));
}
BENCHMARK(BM_BandPowerRatios)->Unit(benchmark::kMillisecond);
