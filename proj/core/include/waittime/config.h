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

#ifndef WAITTIME_CONFIG_H_
#define WAITTIME_CONFIG_H_

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/gbt.h"
#include "waittime/interactions.h"
#include "waittime/synth.h"
#include "waittime/trip_data.h"

namespace waittime {

struct GridConfig {
  // Default box roughly covers Shenzhen; 20 x 25 = 500 regions.
  BoundingBox bbox{22.45, 113.75, 22.85, 114.35};
  int rows = 20;
  int cols = 25;

  RegionGrid Make() const { return RegionGrid(bbox, rows, cols); }
};

struct SlotsConfig {
  double tz_offset_hours = 8.0;
  SlotWindows windows;

  Calendar Make() const { return Calendar(tz_offset_hours, windows); }
};

struct DemandSupplyConfig {
  int granularity_min = 60;
};

struct InteractionsSection {
  bool enabled = true;
  InteractionConfig config;
};

struct EvalConfig {
  double train_frac = 0.8;
  double ridge = 1.0;
  std::vector<double> cdf_thresholds_s = {30, 60, 120, 180, 300};
};

// The single JSON document that drives every command. Missing keys take the
// defaults above; unknown keys are errors.
struct RunConfig {
  GridConfig grid;
  SlotsConfig slots;
  DemandSupplyConfig demand_supply;
  InteractionsSection interactions;
  GbtParams gbt;
  EvalConfig eval;
  SynthConfig synth;

  // Throws ConfigError listing every violation (unknown keys, wrong types,
  // out-of-range values).
  static RunConfig FromJson(const nlohmann::json& j);
  static RunConfig Load(const std::filesystem::path& path);
  // Fully resolved document, defaults included.
  nlohmann::json ToJson() const;
  void Validate() const;
};

}  // namespace waittime

#endif  // WAITTIME_CONFIG_H_
