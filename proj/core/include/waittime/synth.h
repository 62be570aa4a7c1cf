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

#ifndef WAITTIME_SYNTH_H_
#define WAITTIME_SYNTH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/trip_data.h"

namespace waittime {

// Seconds-scale effect weights of the planted waiting-time function.
struct SynthWeights {
  double w_pick = 90.0;        // per km of pick distance
  double w_rush = 40.0;        // rush-hour indicator
  double w_weather = 50.0;     // per unit of weather severity
  double w_demand = 30.0;      // per unit of demand-supply deficit
  double w_od_affinity = 120.0; // per unit of planted OD score in [-1, 1]
  double noise_std = 30.0;
};

struct SynthConfig {
  int64_t n_trips = 50000;
  uint64_t seed = 1;
  int weeks = 4;
  // Monday 2019-01-07 00:00 at UTC+8.
  UnixSeconds start_time = 1546790400;
  double base_wait_s = 100.0;
  SynthWeights weights;
  // (region id, intensity) demand hotspots.
  std::vector<std::pair<RegionId, double>> hotspots = {
      {212, 6.0}, {137, 4.0}, {318, 5.0}, {66, 3.0}, {433, 3.0}};
  // 0 picks one driver per 25 trips.
  int n_drivers = 0;
  // How strongly destination choice follows the planted OD score.
  double od_choice_strength = 1.5;
  double supply_floor = 1.0;

  // Throws ConfigError listing every violation.
  void Validate(const RegionGrid& grid) const;
};

// Per-trip breakdown of the planted waiting time.
struct SynthTruth {
  std::string order_id;
  double base = 0.0;
  double pick = 0.0;
  double rush = 0.0;
  double weather = 0.0;
  double demand = 0.0;
  double od_affinity = 0.0;
  double noise = 0.0;
  int64_t wt_s = 0;  // max(30, round(sum of the above))
};

struct SynthOutput {
  std::vector<TripRecord> trips;  // sorted by order_time
  std::vector<SynthTruth> truth;
};

// Deterministic for a given (config, grid, calendar).
SynthOutput GenerateTrips(const SynthConfig& config, const RegionGrid& grid,
                          const Calendar& calendar);

nlohmann::json TruthToJson(const SynthOutput& out);

}  // namespace waittime

#endif  // WAITTIME_SYNTH_H_
