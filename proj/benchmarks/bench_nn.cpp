#include <benchmark/benchmark.h>

#include "vigilkit/nn.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;

static synth::Cohort cohort() {
  synth::PlantSpec plant;
  plant.planted = {{"LP", "alpha1", 1.0}, {"LT", "gamma2", 1.0}};
  return synth::gen_cohort(plant, 5);
}

static void BM_TrainFold(benchmark::State& state) {
  const auto c = cohort();
  const Eigen::MatrixXd xt = c.data.x.topRows(9);
  const Eigen::VectorXd yt = c.data.y.head(9);
  const Eigen::MatrixXd xv = c.data.x.bottomRows(1);
  const Eigen::VectorXd yv = c.data.y.tail(1);
  nn::NnConfig cfg;
  const int units = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nn::train_fold(xt, yt, xv, yv, units, 1e-3, 0.1, 1, cfg));
}
BENCHMARK(BM_TrainFold)->Arg(40)->Arg(130)->Unit(benchmark::kMicrosecond);

// 5 x 5 slice of the lr x l2 grid, one run, leave-one-out over 10 participants.
static void BM_GridSlice(benchmark::State& state) {
  const auto c = cohort();
  nn::NnConfig cfg;
  cfg.runs = 1;
  cfg.lr_grid = nn::log_grid(1e-4, 1e-2, 5);
  cfg.l2_grid = nn::log_grid(0.01, 10.0, 5);
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(nn::grid_search_loocv(c.data.x, c.data.y, 40, cfg));
}
BENCHMARK(BM_GridSlice)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
