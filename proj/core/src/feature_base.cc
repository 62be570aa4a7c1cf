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

#include "waittime/feature_base.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>
#include <unordered_set>

#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {

std::string_view TaskName(Task task) {
  return task == Task::kPre ? "pre" : "post";
}

Task ParseTask(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "pre") return Task::kPre;
  if (lower == "post") return Task::kPost;
  throw ConfigError("task: expected 'pre' or 'post', got '" +
                    std::string(text) + "'");
}

namespace {

std::string_view KindName(ColumnKind kind) {
  return kind == ColumnKind::kOrdinalInt ? "ordinal-int" : "continuous";
}

std::string_view AvailabilityName(Availability a) {
  return a == Availability::kPreOk ? "PRE_OK" : "POST_ONLY";
}

}  // namespace

FeatureSchema::FeatureSchema(Task task, std::vector<FeatureColumn> columns)
    : task_(task), columns_(std::move(columns)) {
  std::unordered_set<std::string> names;
  for (const FeatureColumn& c : columns_) {
    if (c.name.empty()) throw DataError("feature schema: empty column name");
    if (!names.insert(c.name).second) {
      throw DataError("feature schema: duplicate column " + c.name);
    }
    if (task_ == Task::kPre && c.availability == Availability::kPostOnly) {
      throw DataError("feature schema: POST_ONLY column " + c.name +
                      " in a PRE schema");
    }
  }
}

std::vector<std::string> FeatureSchema::names() const {
  std::vector<std::string> out;
  out.reserve(columns_.size());
  for (const FeatureColumn& c : columns_) out.push_back(c.name);
  return out;
}

int FeatureSchema::IndexOf(std::string_view name) const {
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::string FeatureSchema::Fingerprint() const {
  std::string canonical = "schema|";
  canonical += TaskName(task_);
  for (const FeatureColumn& c : columns_) {
    canonical += '|';
    canonical += c.name;
    canonical += ':';
    canonical += KindName(c.kind);
    canonical += ':';
    canonical += AvailabilityName(c.availability);
  }
  return HexFingerprint(canonical);
}

FeatureSchema FeatureSchema::Extended(std::span<const FeatureColumn> more) const {
  std::vector<FeatureColumn> cols = columns_;
  cols.insert(cols.end(), more.begin(), more.end());
  return FeatureSchema(task_, std::move(cols));
}

nlohmann::json FeatureSchema::ToJson() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const FeatureColumn& c : columns_) {
    cols.push_back({{"name", c.name},
                    {"kind", KindName(c.kind)},
                    {"availability", AvailabilityName(c.availability)}});
  }
  return {{"task", TaskName(task_)},
          {"columns", std::move(cols)},
          {"fingerprint", Fingerprint()}};
}

FeatureSchema FeatureSchema::FromJson(const nlohmann::json& j) {
  try {
    const Task task = ParseTask(j.at("task").get<std::string>());
    std::vector<FeatureColumn> cols;
    for (const auto& c : j.at("columns")) {
      FeatureColumn col;
      col.name = c.at("name").get<std::string>();
      const std::string kind = c.at("kind").get<std::string>();
      const std::string avail = c.at("availability").get<std::string>();
      if (kind == "ordinal-int") {
        col.kind = ColumnKind::kOrdinalInt;
      } else if (kind == "continuous") {
        col.kind = ColumnKind::kContinuous;
      } else {
        throw DataError("feature schema: unknown kind " + kind);
      }
      if (avail == "PRE_OK") {
        col.availability = Availability::kPreOk;
      } else if (avail == "POST_ONLY") {
        col.availability = Availability::kPostOnly;
      } else {
        throw DataError("feature schema: unknown availability " + avail);
      }
      cols.push_back(std::move(col));
    }
    FeatureSchema schema(task, std::move(cols));
    if (j.contains("fingerprint") &&
        j.at("fingerprint").get<std::string>() != schema.Fingerprint()) {
      throw DataError("feature schema: fingerprint mismatch");
    }
    return schema;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("feature schema: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("feature schema: ") + e.what());
  }
}

FeatureSchema BaseSchema(Task task) {
  using K = ColumnKind;
  using A = Availability;
  std::vector<FeatureColumn> cols = {
      {"isRushHour", K::kOrdinalInt, A::kPreOk},
      {"isWeekend", K::kOrdinalInt, A::kPreOk},
      {"O_region", K::kOrdinalInt, A::kPreOk},
      {"D_region", K::kOrdinalInt, A::kPreOk},
      {"orderNum", K::kContinuous, A::kPreOk},
      {"vehicleNum", K::kContinuous, A::kPreOk},
      {"weather", K::kOrdinalInt, A::kPreOk},
      {"tripDistance", K::kContinuous, A::kPreOk},
  };
  if (task == Task::kPost) {
    cols.push_back({"V_region", K::kOrdinalInt, A::kPostOnly});
    cols.push_back({"pickDistance", K::kContinuous, A::kPostOnly});
  }
  return FeatureSchema(task, std::move(cols));
}

DemandSupplyIndex::DemandSupplyIndex(int granularity_min)
    : granularity_min_(granularity_min) {
  if (granularity_min <= 0 || (7 * 24 * 60) % granularity_min != 0) {
    throw ConfigError(
        "demand_supply.granularity_min: must be a positive divisor of 10080");
  }
}

DemandSupply DemandSupplyIndex::Lookup(RegionId region, int slot_of_week) const {
  auto it = table_.find({region, slot_of_week});
  return it == table_.end() ? DemandSupply{} : it->second;
}

nlohmann::json DemandSupplyIndex::ToJson() const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, value] : table_) {
    cells.push_back({key.first, key.second, value.mean_order_count,
                     value.mean_vehicle_count});
  }
  return {{"granularity_min", granularity_min_},
          {"built_from", built_from_},
          {"cells", std::move(cells)}};
}

DemandSupplyIndex DemandSupplyIndex::FromJson(const nlohmann::json& j) {
  try {
    DemandSupplyIndex idx(j.at("granularity_min").get<int>());
    idx.built_from_ = j.at("built_from").get<std::string>();
    for (const auto& c : j.at("cells")) {
      idx.table_[{c.at(0).get<RegionId>(), c.at(1).get<int>()}] =
          DemandSupply{c.at(2).get<double>(), c.at(3).get<double>()};
    }
    return idx;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("demand-supply index: ") + e.what());
  }
}

namespace {

struct TrainWindow {
  UnixSeconds t_min = 0;
  UnixSeconds t_max = 0;
  // Weeks whose instance of each slot intersects [t_min, t_max].
  std::vector<int> weeks_covering;
};

TrainWindow WindowOf(std::span<const LabeledTrip> train, int granularity_min,
                     const Calendar& calendar) {
  TrainWindow w;
  w.t_min = train.front().record.order_time;
  w.t_max = w.t_min;
  for (const LabeledTrip& t : train) {
    w.t_min = std::min(w.t_min, t.record.order_time);
    w.t_max = std::max(w.t_max, t.record.order_time);
  }
  const int slots = 7 * 24 * 60 / granularity_min;
  const int64_t slot_len = int64_t{granularity_min} * 60;
  w.weeks_covering.assign(slots, 0);
  for (int64_t week = calendar.WeekIndex(w.t_min);
       week <= calendar.WeekIndex(w.t_max); ++week) {
    const UnixSeconds start = calendar.WeekStart(week);
    for (int s = 0; s < slots; ++s) {
      const UnixSeconds lo = start + s * slot_len;
      const UnixSeconds hi = lo + slot_len - 1;
      if (hi >= w.t_min && lo <= w.t_max) ++w.weeks_covering[s];
    }
  }
  return w;
}

using Sighting = std::tuple<RegionId, int64_t, int, std::string>;

// Distinct (region, week, slot, driver) instances one trip contributes.
std::vector<Sighting> SightingsOf(const LabeledTrip& t, const TrainWindow& w,
                                  int granularity_min,
                                  const Calendar& calendar) {
  const TripRecord& r = t.record;
  const std::pair<RegionId, UnixSeconds> points[] = {
      {t.v_region, r.order_time},
      {t.o_region, r.pickup_time},
      {t.d_region, r.dropoff_time}};
  std::vector<Sighting> out;
  for (const auto& [region, when] : points) {
    if (when < w.t_min || when > w.t_max) continue;
    Sighting s{region, calendar.WeekIndex(when),
               calendar.SlotOfWeek(when, granularity_min), r.driver_id};
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

DemandSupplyIndex BuildDsIndex(std::span<const LabeledTrip> train,
                               int granularity_min, const Calendar& calendar) {
  if (train.empty()) throw DataError("build_ds_index: empty train set");
  DemandSupplyIndex idx(granularity_min);
  const TrainWindow window = WindowOf(train, granularity_min, calendar);
  const UnixSeconds t_min = window.t_min;
  const UnixSeconds t_max = window.t_max;
  const std::vector<int>& weeks_covering = window.weeks_covering;

  std::map<std::pair<RegionId, int>, int64_t> orders;
  for (const LabeledTrip& t : train) {
    ++orders[{t.o_region, calendar.SlotOfWeek(t.record.order_time,
                                              granularity_min)}];
  }

  std::set<Sighting> sightings;
  for (const LabeledTrip& t : train) {
    for (Sighting& s : SightingsOf(t, window, granularity_min, calendar)) {
      sightings.insert(std::move(s));
    }
  }
  std::map<std::pair<RegionId, int>, int64_t> vehicles;
  for (const auto& [region, week, slot, driver] : sightings) {
    ++vehicles[{region, slot}];
  }

  for (const auto& [key, count] : orders) {
    idx.table_[key].mean_order_count =
        static_cast<double>(count) / weeks_covering[key.second];
  }
  for (const auto& [key, count] : vehicles) {
    idx.table_[key].mean_vehicle_count =
        static_cast<double>(count) / weeks_covering[key.second];
  }
  idx.built_from_ = "orders[" + std::to_string(t_min) + "," +
                    std::to_string(t_max) + "]n=" +
                    std::to_string(train.size());
  return idx;
}

std::vector<DemandSupply> LeaveOneOutDemandSupply(
    std::span<const LabeledTrip> train, const DemandSupplyIndex& index,
    const Calendar& calendar) {
  std::vector<DemandSupply> out;
  if (train.empty()) return out;
  const int g = index.granularity_min();
  const TrainWindow window = WindowOf(train, g, calendar);
  std::map<Sighting, int> trips_per_sighting;
  for (const LabeledTrip& t : train) {
    for (Sighting& s : SightingsOf(t, window, g, calendar)) {
      ++trips_per_sighting[std::move(s)];
    }
  }
  out.reserve(train.size());
  for (const LabeledTrip& t : train) {
    const UnixSeconds when = t.record.order_time;
    const int slot = calendar.SlotOfWeek(when, g);
    const double unit = 1.0 / window.weeks_covering[slot];
    DemandSupply ds = index.Lookup(t.o_region, slot);
    ds.mean_order_count = std::max(0.0, ds.mean_order_count - unit);
    const Sighting own{t.o_region, calendar.WeekIndex(when), slot,
                       t.record.driver_id};
    const std::vector<Sighting> mine = SightingsOf(t, window, g, calendar);
    if (std::find(mine.begin(), mine.end(), own) != mine.end() &&
        trips_per_sighting[own] == 1) {
      ds.mean_vehicle_count = std::max(0.0, ds.mean_vehicle_count - unit);
    }
    out.push_back(ds);
  }
  return out;
}

std::vector<double> FeatureMatrix::Column(size_t col) const {
  std::vector<double> out(rows());
  for (size_t i = 0; i < rows(); ++i) out[i] = At(i, col);
  return out;
}

void FeatureMatrix::Validate() const {
  if (values.size() != rows() * cols()) {
    throw DataError("feature matrix: " + std::to_string(values.size()) +
                    " values for " + std::to_string(rows()) + " x " +
                    std::to_string(cols()));
  }
  if (!row_ids.empty() && row_ids.size() != rows()) {
    throw DataError("feature matrix: row id count differs from label count");
  }
  for (size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError("feature matrix: non-finite value at row " +
                      std::to_string(i / std::max<size_t>(cols(), 1)) +
                      ", column " + schema.columns()[i % cols()].name);
    }
  }
  for (size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels[i])) {
      throw DataError("feature matrix: non-finite label at row " +
                      std::to_string(i));
    }
  }
}

void FeaturizeBase(const LabeledTrip& trip, Task task,
                   const DemandSupplyIndex& index, const Calendar& calendar,
                   std::vector<double>& out) {
  FeaturizeBase(trip, task,
                index.Lookup(trip.o_region,
                             calendar.SlotOfWeek(trip.record.order_time,
                                                 index.granularity_min())),
                calendar, out);
}

void FeaturizeBase(const LabeledTrip& trip, Task task, DemandSupply ds,
                   const Calendar& calendar, std::vector<double>& out) {
  const TripRecord& r = trip.record;
  const TimeSlot slot = calendar.SlotOf(r.order_time);
  out.push_back(static_cast<double>(slot.slot));
  out.push_back(slot.is_weekend ? 1.0 : 0.0);
  out.push_back(trip.o_region);
  out.push_back(trip.d_region);
  out.push_back(ds.mean_order_count);
  out.push_back(ds.mean_vehicle_count);
  out.push_back(r.weather_code);
  out.push_back(r.trip_distance_m);
  if (task == Task::kPost) {
    out.push_back(trip.v_region);
    out.push_back(r.pick_distance_m);
  }
}

std::filesystem::path SchemaSidecarPath(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p.replace_extension(".schema.json");
  return p;
}

void SaveFeatureMatrix(const FeatureMatrix& fm,
                       const std::filesystem::path& csv_path) {
  fm.Validate();
  std::string out = "order_id";
  for (const FeatureColumn& c : fm.schema.columns()) out += "," + c.name;
  out += ",wt_act_s\n";
  for (size_t i = 0; i < fm.rows(); ++i) {
    out += fm.row_ids.empty() ? std::to_string(i) : CsvField(fm.row_ids[i]);
    for (double v : fm.Row(i)) {
      out += ',';
      out += FormatDouble(v);
    }
    out += ',';
    out += FormatDouble(fm.labels[i]);
    out += '\n';
  }
  WriteFileAtomic(SchemaSidecarPath(csv_path), fm.schema.ToJson().dump(2) + "\n");
  WriteFileAtomic(csv_path, out);
}

FeatureMatrix LoadFeatureMatrix(const std::filesystem::path& csv_path) {
  FeatureMatrix fm;
  nlohmann::json schema_json;
  try {
    schema_json = nlohmann::json::parse(ReadFile(SchemaSidecarPath(csv_path)));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("feature schema sidecar: " + std::string(e.what()));
  }
  fm.schema = FeatureSchema::FromJson(schema_json);

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("feature CSV: missing header");
  const std::vector<std::string> header = SplitCsvLine(line);
  const size_t d = fm.schema.size();
  bool header_ok = header.size() == d + 2 && header.front() == "order_id" &&
                   header.back() == "wt_act_s";
  for (size_t c = 0; header_ok && c < d; ++c) {
    header_ok = header[c + 1] == fm.schema.columns()[c].name;
  }
  if (!header_ok) throw DataError("feature CSV: header does not match schema");
  size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != d + 2) {
      throw DataError("feature CSV: row " + std::to_string(row) +
                      " has wrong field count");
    }
    fm.row_ids.push_back(f[0]);
    for (size_t c = 0; c < d + 1; ++c) {
      double v;
      if (!ParseDouble(f[c + 1], v)) {
        throw DataError("feature CSV: row " + std::to_string(row) +
                        " has a non-numeric or non-finite value");
      }
      if (c < d) {
        fm.values.push_back(v);
      } else {
        fm.labels.push_back(v);
      }
    }
  }
  if (in.bad()) throw IoError("failed reading " + csv_path.string());
  fm.Validate();
  return fm;
}

}  // namespace waittime
