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

#ifndef WAITTIME_TRIP_DATA_H_
#define WAITTIME_TRIP_DATA_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "waittime/geo.h"

namespace waittime {

using UnixSeconds = int64_t;
using RegionId = int32_t;

struct BoundingBox {
  double min_lat = 0.0;
  double min_lng = 0.0;
  double max_lat = 0.0;
  double max_lng = 0.0;
};

// Uniform rows x cols partition of a bounding box. Region ids are row-major:
// id = row * cols + col, with row 0 on the southern edge.
class RegionGrid {
 public:
  // Throws ConfigError on an empty box or non-positive dimensions.
  RegionGrid(BoundingBox bbox, int rows, int cols);

  const BoundingBox& bbox() const { return bbox_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int region_count() const { return rows_ * cols_; }
  double cell_height() const { return cell_h_; }
  double cell_width() const { return cell_w_; }

  bool Contains(const GeoPoint& p) const;
  bool IsValidRegion(RegionId id) const {
    return id >= 0 && id < region_count();
  }

  // Throws OutOfBounds when p lies outside the box. The top and east edges
  // belong to the last row and column.
  RegionId RegionOf(const GeoPoint& p) const;

  int RowOf(RegionId id) const;
  int ColOf(RegionId id) const;
  GeoPoint Centroid(RegionId id) const;
  // Half-open [lo, hi) per axis; the last row/column is closed at the top.
  BoundingBox CellBounds(RegionId id) const;

  std::string Fingerprint() const;

 private:
  void CheckRegion(RegionId id) const;

  BoundingBox bbox_;
  int rows_;
  int cols_;
  double cell_h_;
  double cell_w_;
};

enum class Slot : int {
  kMorningRush = 0,
  kEveningRush = 1,
  kLateNight = 2,
  kOther = 3,
};

std::string_view SlotName(Slot slot);

struct TimeSlot {
  Slot slot = Slot::kOther;
  bool is_weekend = false;
  friend bool operator==(const TimeSlot&, const TimeSlot&) = default;
};

// Local-hour windows. Each window is [start, end); the late-night window
// wraps past midnight.
struct SlotWindows {
  int morning_start = 7;
  int morning_end = 10;
  int evening_start = 17;
  int evening_end = 20;
  int late_night_start = 23;
  int late_night_end = 6;
};

// Local-time calendar at a fixed UTC offset. No daylight-saving logic.
class Calendar {
 public:
  explicit Calendar(double tz_offset_hours = 8.0, SlotWindows windows = {});

  double tz_offset_hours() const { return tz_offset_hours_; }
  const SlotWindows& windows() const { return windows_; }

  UnixSeconds LocalSeconds(UnixSeconds t) const { return t + offset_s_; }
  int LocalHour(UnixSeconds t) const;
  int LocalMinuteOfDay(UnixSeconds t) const;
  // 0 = Monday ... 6 = Sunday.
  int DayOfWeek(UnixSeconds t) const;
  // Calendar weeks start Monday 00:00 local time.
  int64_t WeekIndex(UnixSeconds t) const;
  // Local start of week `week` as unix seconds.
  UnixSeconds WeekStart(int64_t week) const;
  int SlotOfWeek(UnixSeconds t, int granularity_min) const;

  TimeSlot SlotOf(UnixSeconds t) const;

 private:
  double tz_offset_hours_;
  int64_t offset_s_;
  SlotWindows windows_;
};

inline TimeSlot TimeSlotOf(UnixSeconds t, double tz_offset_hours) {
  return Calendar(tz_offset_hours).SlotOf(t);
}

struct TripRecord {
  std::string order_id;
  UnixSeconds order_time = 0;
  std::string driver_id;
  GeoPoint dispatch_point;
  UnixSeconds pickup_time = 0;
  GeoPoint pickup_point;
  UnixSeconds dropoff_time = 0;
  GeoPoint dropoff_point;
  double trip_distance_m = 0.0;
  double pick_distance_m = 0.0;
  int weather_code = 0;

  friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

// A trip that passed validation, with its waiting-time label and the regions
// of its pickup (origin), dropoff (destination) and dispatch (vehicle) points.
struct LabeledTrip {
  TripRecord record;
  int64_t wt_act_s = 0;
  RegionId o_region = 0;
  RegionId d_region = 0;
  RegionId v_region = 0;

  friend bool operator==(const LabeledTrip&, const LabeledTrip&) = default;
};

enum class RejectReason {
  kOutOfBbox,
  kTimeOrder,
  kMalformed,
  kNegativeDistance,
};

std::string_view ReasonCode(RejectReason reason);

struct Rejection {
  int64_t row_number = 0;  // 1-based, counting data rows after the header
  RejectReason reason = RejectReason::kMalformed;
  std::string detail;
};

struct ParseResult {
  std::vector<LabeledTrip> trips;
  std::vector<Rejection> rejections;
};

inline constexpr std::string_view kTripColumns[] = {
    "order_id",     "order_time",      "driver_id",       "dispatch_lat",
    "dispatch_lng", "pickup_time",     "pickup_lat",      "pickup_lng",
    "dropoff_time", "dropoff_lat",     "dropoff_lng",     "trip_distance_m",
    "pick_distance_m", "weather_code"};

// Validates a record against the grid. Returns the labeled trip, or the
// first failing reason when `reason` is non-null.
std::optional<LabeledTrip> LabelTrip(const TripRecord& record,
                                     const RegionGrid& grid,
                                     RejectReason* reason = nullptr);

// Parses a trip CSV. Columns are matched by header name; extra columns are
// ignored. Throws DataError when a required column is missing and IoError
// when the stream fails.
ParseResult ParseTrips(std::istream& in, const RegionGrid& grid);
ParseResult ParseTripsFile(const std::string& path, const RegionGrid& grid);

std::string TripsToCsv(std::span<const TripRecord> records);
std::string TripsToCsv(std::span<const LabeledTrip> trips);
std::string RejectionsToCsv(std::span<const Rejection> rejections);

struct SplitResult {
  std::vector<LabeledTrip> train;
  std::vector<LabeledTrip> test;
  std::vector<std::string> warnings;
};

// Stable-sorts by order_time and puts the first ceil(n * train_frac) trips in
// train. Throws ConfigError when train_frac is outside (0, 1) and DataError on
// empty input.
SplitResult ChronoSplit(std::vector<LabeledTrip> trips, double train_frac);

}  // namespace waittime

#endif  // WAITTIME_TRIP_DATA_H_
