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

#ifndef WAITTIME_FEATURIZER_H_
#define WAITTIME_FEATURIZER_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>

#include "waittime/feature_base.h"
#include "waittime/interactions.h"
#include "waittime/trip_data.h"

namespace waittime {

// Fitted featurization state for one train window: the demand-supply index
// and, optionally, the interaction models. Featurizing never refits.
class Featurizer {
 public:
  // Fits everything on `train` only.
  static Featurizer Fit(std::span<const LabeledTrip> train, RegionGrid grid,
                        Calendar calendar, int ds_granularity_min,
                        std::optional<InteractionConfig> interactions);

  const RegionGrid& grid() const { return grid_; }
  const Calendar& calendar() const { return calendar_; }
  const DemandSupplyIndex& ds_index() const { return ds_index_; }
  bool has_interactions() const { return interactions_.has_value(); }
  const InteractionModels& interactions() const { return *interactions_; }

  FeatureSchema Schema(Task task, bool with_interactions) const;
  // Throws DataError when interactions are requested but were not fitted.
  FeatureMatrix Featurize(std::span<const LabeledTrip> trips, Task task,
                          bool with_interactions) const;

  // Featurizes the trips Fit() saw with each trip's own contribution left
  // out of the count-based columns, so train rows look like rows the fitted
  // state has never seen. Throws DataError for a trip that was not fitted.
  FeatureMatrix FeaturizeFitRows(std::span<const LabeledTrip> trips, Task task,
                                 bool with_interactions) const;

  // Writes ds_index.json and, when fitted, interactions.json into `dir`.
  void Save(const std::filesystem::path& dir) const;
  static Featurizer Load(const std::filesystem::path& dir, RegionGrid grid,
                         Calendar calendar);

 private:
  Featurizer(RegionGrid grid, Calendar calendar)
      : grid_(std::move(grid)), calendar_(std::move(calendar)) {}

  FeatureMatrix Build(std::span<const LabeledTrip> trips, Task task,
                      bool with_interactions, bool fit_rows) const;

  RegionGrid grid_;
  Calendar calendar_;
  DemandSupplyIndex ds_index_;
  std::optional<InteractionModels> interactions_;
  // Leave-one-out demand-supply values of the fitted trips; not persisted.
  std::unordered_map<std::string, DemandSupply> fit_rows_;
};

}  // namespace waittime

#endif  // WAITTIME_FEATURIZER_H_
