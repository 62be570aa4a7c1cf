/*
 * Copyright 2026 The waittime Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "waittime/config.h"
#include "waittime/featurizer.h"
#include "waittime/gbt.h"
#include "waittime/synth.h"

namespace waittime {
namespace {

std::vector<LabeledTrip> Trips(int64_t n) {
  RunConfig config;
  config.synth.n_trips = n;
  const RegionGrid grid = config.grid.Make();
  const SynthOutput out = GenerateTrips(config.synth, grid, config.slots.Make());
  std::vector<LabeledTrip> trips;
  trips.reserve(out.trips.size());
  for (const TripRecord& r : out.trips) trips.push_back(*LabelTrip(r, grid));
  return trips;
}

FeatureMatrix RandomMatrix(size_t rows, size_t cols) {
  std::vector<FeatureColumn> columns;
  for (size_t f = 0; f < cols; ++f) columns.push_back({"f" + std::to_string(f)});
  FeatureMatrix fm;
  fm.schema = FeatureSchema(Task::kPost, columns);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 1.0);
  fm.values.resize(rows * cols);
  for (double& v : fm.values) v = d(rng);
  for (size_t i = 0; i < rows; ++i) {
    fm.labels.push_back(3 * fm.values[i * cols] + fm.values[i * cols + 1] * fm.values[i * cols + 2] +
                        d(rng));
  }
  return fm;
}

void BM_GenerateTrips(benchmark::State& state) {
  RunConfig config;
  config.synth.n_trips = state.range(0);
  const RegionGrid grid = config.grid.Make();
  const Calendar cal = config.slots.Make();
  for (auto _ : state) benchmark::DoNotOptimize(GenerateTrips(config.synth, grid, cal));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateTrips)->Arg(10000)->Arg(50000)->Unit(benchmark::kMillisecond);

void BM_FitFeaturizer(benchmark::State& state) {
  const auto trips = Trips(state.range(0));
  RunConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Featurizer::Fit(trips, config.grid.Make(), config.slots.Make(),
                                             config.demand_supply.granularity_min,
                                             config.interactions.config));
  }
}
BENCHMARK(BM_FitFeaturizer)->Arg(40000)->Unit(benchmark::kMillisecond);

void BM_FeaturizePost(benchmark::State& state) {
  const auto trips = Trips(state.range(0));
  RunConfig config;
  const Featurizer f = Featurizer::Fit(trips, config.grid.Make(), config.slots.Make(),
                                       config.demand_supply.granularity_min,
                                       config.interactions.config);
  for (auto _ : state) benchmark::DoNotOptimize(f.Featurize(trips, Task::kPost, true));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FeaturizePost)->Arg(40000)->Unit(benchmark::kMillisecond);

void BM_TrainGbt(benchmark::State& state) {
  const FeatureMatrix fm = RandomMatrix(static_cast<size_t>(state.range(0)), 39);
  GbtParams p;
  p.num_trees = 50;
  TrainOptions options;
  options.num_threads = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(TrainGbt(fm, p, options));
}
BENCHMARK(BM_TrainGbt)
    ->Args({40000, 1})
    ->Args({40000, 4})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

void BM_PredictGbt(benchmark::State& state) {
  const FeatureMatrix fm = RandomMatrix(10000, 39);
  const GbtModel m = TrainGbt(fm, GbtParams{});
  for (auto _ : state) benchmark::DoNotOptimize(PredictGbt(m, fm));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_PredictGbt)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace waittime

BENCHMARK_MAIN();
