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

#include "waittime/trip_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {

namespace {

constexpr int64_t kDay = 86400;
constexpr int64_t kWeek = 7 * kDay;
// 1970-01-05, the first Monday after the epoch.
constexpr int64_t kFirstMonday = 4 * kDay;

bool InWindow(int hour, int start, int end) {
  if (start <= end) return hour >= start && hour < end;
  return hour >= start || hour < end;
}

}  // namespace

RegionGrid::RegionGrid(BoundingBox bbox, int rows, int cols)
    : bbox_(bbox), rows_(rows), cols_(cols) {
  std::vector<std::string> violations;
  if (!(std::isfinite(bbox.min_lat) && std::isfinite(bbox.max_lat) &&
        std::isfinite(bbox.min_lng) && std::isfinite(bbox.max_lng))) {
    violations.push_back("grid.bbox: non-finite coordinate");
  }
  if (!(bbox.min_lat < bbox.max_lat) || bbox.min_lat < -90.0 ||
      bbox.max_lat > 90.0) {
    violations.push_back("grid.bbox: need -90 <= min_lat < max_lat <= 90");
  }
  if (!(bbox.min_lng < bbox.max_lng) || bbox.min_lng < -180.0 ||
      bbox.max_lng > 180.0) {
    violations.push_back("grid.bbox: need -180 <= min_lng < max_lng <= 180");
  }
  if (rows <= 0) violations.push_back("grid.rows: must be positive");
  if (cols <= 0) violations.push_back("grid.cols: must be positive");
  if (!violations.empty()) throw ConfigError(std::move(violations));
  cell_h_ = (bbox.max_lat - bbox.min_lat) / rows;
  cell_w_ = (bbox.max_lng - bbox.min_lng) / cols;
}

bool RegionGrid::Contains(const GeoPoint& p) const {
  return p.IsValid() && p.lat >= bbox_.min_lat && p.lat <= bbox_.max_lat &&
         p.lng >= bbox_.min_lng && p.lng <= bbox_.max_lng;
}

RegionId RegionGrid::RegionOf(const GeoPoint& p) const {
  if (!Contains(p)) {
    throw OutOfBounds("point (" + FormatDouble(p.lat) + ", " +
                      FormatDouble(p.lng) + ") outside grid bbox");
  }
  auto locate = [](double v, double lo, double step, int n) {
    int i = static_cast<int>(std::floor((v - lo) / step));
    i = std::clamp(i, 0, n - 1);
    // Keep the index consistent with the cell edges lo + i * step.
    while (i > 0 && v < lo + i * step) --i;
    while (i < n - 1 && v >= lo + (i + 1) * step) ++i;
    return i;
  };
  const int row = locate(p.lat, bbox_.min_lat, cell_h_, rows_);
  const int col = locate(p.lng, bbox_.min_lng, cell_w_, cols_);
  return row * cols_ + col;
}

void RegionGrid::CheckRegion(RegionId id) const {
  if (!IsValidRegion(id)) {
    throw OutOfBounds("region id " + std::to_string(id) + " not in [0, " +
                      std::to_string(region_count()) + ")");
  }
}

int RegionGrid::RowOf(RegionId id) const {
  CheckRegion(id);
  return id / cols_;
}

int RegionGrid::ColOf(RegionId id) const {
  CheckRegion(id);
  return id % cols_;
}

GeoPoint RegionGrid::Centroid(RegionId id) const {
  const BoundingBox b = CellBounds(id);
  return {(b.min_lat + b.max_lat) / 2.0, (b.min_lng + b.max_lng) / 2.0};
}

BoundingBox RegionGrid::CellBounds(RegionId id) const {
  const int row = RowOf(id);
  const int col = ColOf(id);
  BoundingBox b;
  b.min_lat = bbox_.min_lat + row * cell_h_;
  b.max_lat = row == rows_ - 1 ? bbox_.max_lat : bbox_.min_lat + (row + 1) * cell_h_;
  b.min_lng = bbox_.min_lng + col * cell_w_;
  b.max_lng = col == cols_ - 1 ? bbox_.max_lng : bbox_.min_lng + (col + 1) * cell_w_;
  return b;
}

std::string RegionGrid::Fingerprint() const {
  return HexFingerprint("grid|" + FormatDouble(bbox_.min_lat) + "|" +
                        FormatDouble(bbox_.min_lng) + "|" +
                        FormatDouble(bbox_.max_lat) + "|" +
                        FormatDouble(bbox_.max_lng) + "|" +
                        std::to_string(rows_) + "|" + std::to_string(cols_));
}

std::string_view SlotName(Slot slot) {
  switch (slot) {
    case Slot::kMorningRush: return "MorningRush";
    case Slot::kEveningRush: return "EveningRush";
    case Slot::kLateNight: return "LateNight";
    case Slot::kOther: return "Other";
  }
  return "Other";
}

Calendar::Calendar(double tz_offset_hours, SlotWindows windows)
    : tz_offset_hours_(tz_offset_hours), windows_(windows) {
  std::vector<std::string> violations;
  if (!std::isfinite(tz_offset_hours) || tz_offset_hours < -14.0 ||
      tz_offset_hours > 14.0) {
    violations.push_back("slots.tz_offset_hours: must be within [-14, 14]");
  }
  for (int h : {windows.morning_start, windows.morning_end,
                windows.evening_start, windows.evening_end,
                windows.late_night_start, windows.late_night_end}) {
    if (h < 0 || h > 24) {
      violations.push_back("slots: window hours must be within [0, 24]");
      break;
    }
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));
  offset_s_ = std::llround(tz_offset_hours * 3600.0);
}

int Calendar::LocalHour(UnixSeconds t) const {
  return static_cast<int>(FloorMod(LocalSeconds(t), kDay) / 3600);
}

int Calendar::LocalMinuteOfDay(UnixSeconds t) const {
  return static_cast<int>(FloorMod(LocalSeconds(t), kDay) / 60);
}

int Calendar::DayOfWeek(UnixSeconds t) const {
  // 1970-01-01 was a Thursday.
  return static_cast<int>(FloorMod(FloorDiv(LocalSeconds(t), kDay) + 3, 7));
}

int64_t Calendar::WeekIndex(UnixSeconds t) const {
  return FloorDiv(LocalSeconds(t) - kFirstMonday, kWeek);
}

UnixSeconds Calendar::WeekStart(int64_t week) const {
  return week * kWeek + kFirstMonday - offset_s_;
}

int Calendar::SlotOfWeek(UnixSeconds t, int granularity_min) const {
  const int64_t since_monday = FloorMod(LocalSeconds(t) - kFirstMonday, kWeek);
  return static_cast<int>(since_monday / (int64_t{granularity_min} * 60));
}

TimeSlot Calendar::SlotOf(UnixSeconds t) const {
  const int h = LocalHour(t);
  TimeSlot out;
  if (InWindow(h, windows_.morning_start, windows_.morning_end)) {
    out.slot = Slot::kMorningRush;
  } else if (InWindow(h, windows_.evening_start, windows_.evening_end)) {
    out.slot = Slot::kEveningRush;
  } else if (InWindow(h, windows_.late_night_start, windows_.late_night_end)) {
    out.slot = Slot::kLateNight;
  } else {
    out.slot = Slot::kOther;
  }
  const int dow = DayOfWeek(t);
  out.is_weekend = dow >= 5;
  return out;
}

std::string_view ReasonCode(RejectReason reason) {
  switch (reason) {
    case RejectReason::kOutOfBbox: return "OUT_OF_BBOX";
    case RejectReason::kTimeOrder: return "TIME_ORDER";
    case RejectReason::kMalformed: return "MALFORMED";
    case RejectReason::kNegativeDistance: return "NEGATIVE_DISTANCE";
  }
  return "MALFORMED";
}

std::optional<LabeledTrip> LabelTrip(const TripRecord& r,
                                     const RegionGrid& grid,
                                     RejectReason* reason) {
  auto reject = [&](RejectReason why) -> std::optional<LabeledTrip> {
    if (reason != nullptr) *reason = why;
    return std::nullopt;
  };
  if (r.order_id.empty() || !r.dispatch_point.IsValid() ||
      !r.pickup_point.IsValid() || !r.dropoff_point.IsValid() ||
      !std::isfinite(r.trip_distance_m) || !std::isfinite(r.pick_distance_m)) {
    return reject(RejectReason::kMalformed);
  }
  // A zero waiting time is rejected as well: the label must be positive.
  if (!(r.order_time < r.pickup_time && r.pickup_time <= r.dropoff_time)) {
    return reject(RejectReason::kTimeOrder);
  }
  if (r.trip_distance_m < 0.0 || r.pick_distance_m < 0.0) {
    return reject(RejectReason::kNegativeDistance);
  }
  if (!grid.Contains(r.dispatch_point) || !grid.Contains(r.pickup_point) ||
      !grid.Contains(r.dropoff_point)) {
    return reject(RejectReason::kOutOfBbox);
  }
  LabeledTrip out;
  out.record = r;
  out.wt_act_s = r.pickup_time - r.order_time;
  out.o_region = grid.RegionOf(r.pickup_point);
  out.d_region = grid.RegionOf(r.dropoff_point);
  out.v_region = grid.RegionOf(r.dispatch_point);
  return out;
}

ParseResult ParseTrips(std::istream& in, const RegionGrid& grid) {
  if (!in) throw IoError("trip stream is not readable");
  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw IoError("failed reading trip stream");
    throw DataError("trip CSV: missing header");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  const std::vector<std::string> header = SplitCsvLine(line);
  std::unordered_map<std::string, size_t> position;
  for (size_t i = 0; i < header.size(); ++i) position[header[i]] = i;
  std::vector<std::string> missing;
  size_t col[std::size(kTripColumns)];
  for (size_t c = 0; c < std::size(kTripColumns); ++c) {
    auto it = position.find(std::string(kTripColumns[c]));
    if (it == position.end()) {
      missing.emplace_back(kTripColumns[c]);
    } else {
      col[c] = it->second;
    }
  }
  if (!missing.empty()) {
    std::string msg = "trip CSV: missing header column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  ParseResult result;
  std::unordered_set<std::string> seen_ids;
  int64_t row_number = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    ++row_number;
    const std::vector<std::string> f = SplitCsvLine(line);
    auto malformed = [&](std::string detail) {
      result.rejections.push_back(
          {row_number, RejectReason::kMalformed, std::move(detail)});
    };
    if (f.size() < header.size()) {
      malformed("expected " + std::to_string(header.size()) + " fields, got " +
                std::to_string(f.size()));
      continue;
    }
    TripRecord r;
    r.order_id = f[col[0]];
    r.driver_id = f[col[2]];
    int64_t weather = 0;
    bool ok = ParseInt64(f[col[1]], r.order_time) &&
              ParseDouble(f[col[3]], r.dispatch_point.lat) &&
              ParseDouble(f[col[4]], r.dispatch_point.lng) &&
              ParseInt64(f[col[5]], r.pickup_time) &&
              ParseDouble(f[col[6]], r.pickup_point.lat) &&
              ParseDouble(f[col[7]], r.pickup_point.lng) &&
              ParseInt64(f[col[8]], r.dropoff_time) &&
              ParseDouble(f[col[9]], r.dropoff_point.lat) &&
              ParseDouble(f[col[10]], r.dropoff_point.lng) &&
              ParseDouble(f[col[11]], r.trip_distance_m) &&
              ParseDouble(f[col[12]], r.pick_distance_m) &&
              ParseInt64(f[col[13]], weather);
    if (!ok || weather < 0 || weather > 255) {
      malformed("unparseable field");
      continue;
    }
    r.weather_code = static_cast<int>(weather);
    RejectReason why;
    std::optional<LabeledTrip> labeled = LabelTrip(r, grid, &why);
    if (!labeled) {
      result.rejections.push_back({row_number, why, {}});
      continue;
    }
    if (!seen_ids.insert(r.order_id).second) {
      malformed("duplicate order_id " + r.order_id);
      continue;
    }
    result.trips.push_back(std::move(*labeled));
  }
  if (in.bad()) throw IoError("failed reading trip stream");
  return result;
}

ParseResult ParseTripsFile(const std::string& path, const RegionGrid& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trip file: " + path);
  return ParseTrips(in, grid);
}

namespace {

void AppendTripRow(std::string& out, const TripRecord& r) {
  out += CsvField(r.order_id);
  out += ',' + std::to_string(r.order_time) + ',';
  out += CsvField(r.driver_id);
  out += ',' + FormatDouble(r.dispatch_point.lat);
  out += ',' + FormatDouble(r.dispatch_point.lng);
  out += ',' + std::to_string(r.pickup_time);
  out += ',' + FormatDouble(r.pickup_point.lat);
  out += ',' + FormatDouble(r.pickup_point.lng);
  out += ',' + std::to_string(r.dropoff_time);
  out += ',' + FormatDouble(r.dropoff_point.lat);
  out += ',' + FormatDouble(r.dropoff_point.lng);
  out += ',' + FormatDouble(r.trip_distance_m);
  out += ',' + FormatDouble(r.pick_distance_m);
  out += ',' + std::to_string(r.weather_code);
  out += '\n';
}

std::string TripHeader() {
  std::string out;
  for (size_t c = 0; c < std::size(kTripColumns); ++c) {
    if (c > 0) out += ',';
    out += kTripColumns[c];
  }
  out += '\n';
  return out;
}

}  // namespace

std::string TripsToCsv(std::span<const TripRecord> records) {
  std::string out = TripHeader();
  for (const TripRecord& r : records) AppendTripRow(out, r);
  return out;
}

std::string TripsToCsv(std::span<const LabeledTrip> trips) {
  std::string out = TripHeader();
  for (const LabeledTrip& t : trips) AppendTripRow(out, t.record);
  return out;
}

std::string RejectionsToCsv(std::span<const Rejection> rejections) {
  std::string out = "row_number,reason_code\n";
  for (const Rejection& r : rejections) {
    out += std::to_string(r.row_number);
    out += ',';
    out += ReasonCode(r.reason);
    out += '\n';
  }
  return out;
}

SplitResult ChronoSplit(std::vector<LabeledTrip> trips, double train_frac) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("eval.train_frac: must be in (0, 1)");
  }
  if (trips.empty()) throw DataError("chrono_split: no trips");
  std::stable_sort(trips.begin(), trips.end(),
                   [](const LabeledTrip& a, const LabeledTrip& b) {
                     return a.record.order_time < b.record.order_time;
                   });
  const double raw = static_cast<double>(trips.size()) * train_frac;
  // Absorb representation error such as 10 * 0.8 = 8.000000000000002.
  size_t n_train = static_cast<size_t>(std::ceil(raw - 1e-9));
  n_train = std::clamp<size_t>(n_train, 1, trips.size());
  SplitResult out;
  out.test.assign(std::make_move_iterator(trips.begin() + n_train),
                  std::make_move_iterator(trips.end()));
  trips.resize(n_train);
  out.train = std::move(trips);
  if (out.test.empty()) {
    out.warnings.push_back("chrono_split: test set is empty");
  }
  return out;
}

}  // namespace waittime
