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

#ifndef WAITTIME_EXPERIMENT_H_
#define WAITTIME_EXPERIMENT_H_

#include <map>
#include <string>
#include <vector>

#include "waittime/config.h"
#include "waittime/evaluation.h"
#include "waittime/gbt.h"
#include "waittime/trip_data.h"

namespace waittime {

inline constexpr const char* kModelLinear = "LR";
inline constexpr const char* kModelGbtBase = "GBT-base";
inline constexpr const char* kModelFixgb = "FiXGBoost";

struct ExperimentOptions {
  int num_threads = 1;
};

struct ExperimentResult {
  // Ordered pre then post; LR, GBT-base, FiXGBoost within each task.
  std::vector<EvalReport> reports;
  // Keyed "<model>/<task>", e.g. "FiXGBoost/post".
  std::map<std::string, GbtModel> models;
  std::vector<std::string> warnings;
};

// Chronological split, then {LR, GBT-base, FiXGBoost} x {pre, post}. Every
// fitted component sees the train split only. Errors name the failing stage.
ExperimentResult RunExperiment(const RunConfig& config,
                               std::vector<LabeledTrip> trips,
                               const ExperimentOptions& options = {});

}  // namespace waittime

#endif  // WAITTIME_EXPERIMENT_H_
