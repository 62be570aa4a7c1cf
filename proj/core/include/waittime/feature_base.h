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

#ifndef WAITTIME_FEATURE_BASE_H_
#define WAITTIME_FEATURE_BASE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/trip_data.h"

namespace waittime {

enum class Task { kPre, kPost };

std::string_view TaskName(Task task);
// Accepts "pre" or "post" (case-insensitive); throws ConfigError otherwise.
Task ParseTask(std::string_view text);

enum class ColumnKind { kOrdinalInt, kContinuous };
enum class Availability { kPreOk, kPostOnly };

struct FeatureColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kContinuous;
  Availability availability = Availability::kPreOk;

  friend bool operator==(const FeatureColumn&, const FeatureColumn&) = default;
};

// Ordered, named feature columns for one prediction task. A PRE schema never
// holds a POST_ONLY column; names are unique.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  // Throws DataError when the columns violate the task contract.
  FeatureSchema(Task task, std::vector<FeatureColumn> columns);

  Task task() const { return task_; }
  const std::vector<FeatureColumn>& columns() const { return columns_; }
  size_t size() const { return columns_.size(); }
  std::vector<std::string> names() const;
  // -1 when absent.
  int IndexOf(std::string_view name) const;

  // Hash of the task and the ordered (name, kind, availability) list.
  std::string Fingerprint() const;

  // Returns a new schema with `more` appended; validated like the ctor.
  FeatureSchema Extended(std::span<const FeatureColumn> more) const;

  nlohmann::json ToJson() const;
  static FeatureSchema FromJson(const nlohmann::json& j);

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  Task task_ = Task::kPre;
  std::vector<FeatureColumn> columns_;
};

// The 8 PRE or 10 POST base columns, in row order.
FeatureSchema BaseSchema(Task task);

struct DemandSupply {
  double mean_order_count = 0.0;
  double mean_vehicle_count = 0.0;
};

// Historical per-(region, slot-of-week) mean order and observed-vehicle
// counts from a training window.
class DemandSupplyIndex {
 public:
  DemandSupplyIndex() = default;
  // Throws ConfigError unless granularity_min divides a week.
  explicit DemandSupplyIndex(int granularity_min);

  int granularity_min() const { return granularity_min_; }
  int slots_per_week() const { return 7 * 24 * 60 / granularity_min_; }
  const std::string& built_from() const { return built_from_; }
  size_t size() const { return table_.size(); }

  // Unseen keys yield (0, 0).
  DemandSupply Lookup(RegionId region, int slot_of_week) const;

  nlohmann::json ToJson() const;
  static DemandSupplyIndex FromJson(const nlohmann::json& j);

 private:
  friend DemandSupplyIndex BuildDsIndex(std::span<const LabeledTrip>, int,
                                        const Calendar&);
  int granularity_min_ = 60;
  std::string built_from_;
  std::map<std::pair<RegionId, int>, DemandSupply> table_;
};

// mean_order_count(r, s): orders with o_region = r in slot-of-week s, divided
// by the number of calendar weeks whose instance of s intersects the train
// window [first order, last order]. mean_vehicle_count(r, s): distinct
// drivers seen in r during each instance of s (dispatch point at order time,
// pickup and dropoff points at their times), averaged the same way.
// Throws DataError on an empty train set.
DemandSupplyIndex BuildDsIndex(std::span<const LabeledTrip> train,
                               int granularity_min, const Calendar& calendar);

// Dense row-major feature matrix with labels (seconds) and row ids.
struct FeatureMatrix {
  FeatureSchema schema;
  std::vector<double> values;
  std::vector<double> labels;
  std::vector<std::string> row_ids;

  size_t rows() const { return labels.size(); }
  size_t cols() const { return schema.size(); }
  std::span<const double> Row(size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  double At(size_t row, size_t col) const { return values[row * cols() + col]; }
  std::vector<double> Column(size_t col) const;

  // Throws DataError on a shape mismatch or any non-finite value.
  void Validate() const;
};

// Appends the base feature row for `trip`. PRE rows never read the dispatch
// point, driver id or pick distance.
void FeaturizeBase(const LabeledTrip& trip, Task task,
                   const DemandSupplyIndex& index, const Calendar& calendar,
                   std::vector<double>& out);
// Same, with orderNum/vehicleNum supplied by the caller.
void FeaturizeBase(const LabeledTrip& trip, Task task, DemandSupply ds,
                   const Calendar& calendar, std::vector<double>& out);

// For each trip of `train`, the lookup `index` would return at the trip's
// (o_region, slot-of-week) had the trip itself been left out of `train`: its
// own order is removed, and its driver is removed unless another trip also
// puts that driver in the same region-slot instance. `index` must have been
// built from exactly `train`.
std::vector<DemandSupply> LeaveOneOutDemandSupply(
    std::span<const LabeledTrip> train, const DemandSupplyIndex& index,
    const Calendar& calendar);

// CSV layout: order_id, <schema columns...>, wt_act_s. The schema goes to a
// JSON sidecar (see SchemaSidecarPath).
std::filesystem::path SchemaSidecarPath(const std::filesystem::path& csv);
void SaveFeatureMatrix(const FeatureMatrix& fm,
                       const std::filesystem::path& csv_path);
FeatureMatrix LoadFeatureMatrix(const std::filesystem::path& csv_path);

}  // namespace waittime

#endif  // WAITTIME_FEATURE_BASE_H_
