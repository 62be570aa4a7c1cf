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
#include <random>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"
#include "waittime/error.h"
#include "waittime/synth.h"
#include "waittime/util.h"

namespace waittime {
namespace {

using testing::DefaultGrid;
using testing::LocalTime;
using testing::MakeRecord;
using testing::MakeTrip;

TEST(RegionGridTest, SouthWestCornerIsRegionZero) {
  RegionGrid grid = DefaultGrid();
  EXPECT_EQ(grid.RegionOf({22.45, 113.75}), 0);
}

TEST(RegionGridTest, CellCenterOfSmallGrid) {
  RegionGrid grid({0.0, 0.0, 2.0, 3.0}, 2, 3);
  EXPECT_EQ(grid.RegionOf({1.5, 2.5}), 5);
  EXPECT_EQ(grid.region_count(), 6);
}

TEST(RegionGridTest, TopAndEastEdgesBelongToLastCell) {
  RegionGrid grid({0.0, 0.0, 2.0, 3.0}, 2, 3);
  EXPECT_EQ(grid.RegionOf({2.0, 3.0}), 5);
  EXPECT_EQ(grid.RegionOf({2.0, 0.0}), 3);
  EXPECT_EQ(grid.RegionOf({0.0, 3.0}), 2);
}

TEST(RegionGridTest, OutsideBoxThrows) {
  RegionGrid grid = DefaultGrid();
  EXPECT_THROW(grid.RegionOf({22.44, 114.0}), OutOfBounds);
  EXPECT_THROW(grid.RegionOf({22.5, 114.36}), OutOfBounds);
  EXPECT_THROW(grid.RegionOf({std::nan(""), 114.0}), OutOfBounds);
}

TEST(RegionGridTest, InvalidDimensionsRejected) {
  EXPECT_THROW(RegionGrid({0, 0, 1, 1}, 0, 3), ConfigError);
  EXPECT_THROW(RegionGrid({1, 0, 1, 1}, 2, 3), ConfigError);
}

TEST(RegionGridTest, RandomPointsMatchBruteForceMembership) {
  RegionGrid grid = DefaultGrid();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> lat(22.45, 22.85);
  std::uniform_real_distribution<double> lng(113.75, 114.35);
  for (int i = 0; i < 10000; ++i) {
    const GeoPoint p{lat(rng), lng(rng)};
    const RegionId id = grid.RegionOf(p);
    ASSERT_GE(id, 0);
    ASSERT_LT(id, grid.region_count());
    int hits = 0;
    RegionId found = -1;
    for (RegionId r = 0; r < grid.region_count(); ++r) {
      const BoundingBox b = grid.CellBounds(r);
      const bool top = grid.RowOf(r) == grid.rows() - 1;
      const bool east = grid.ColOf(r) == grid.cols() - 1;
      const bool in_lat = p.lat >= b.min_lat && (p.lat < b.max_lat || (top && p.lat <= b.max_lat));
      const bool in_lng = p.lng >= b.min_lng && (p.lng < b.max_lng || (east && p.lng <= b.max_lng));
      if (in_lat && in_lng) {
        ++hits;
        found = r;
      }
    }
    ASSERT_EQ(hits, 1) << p.lat << "," << p.lng;
    ASSERT_EQ(found, id);
  }
}

TEST(RegionGridTest, CentroidLiesInItsCell) {
  RegionGrid grid = DefaultGrid();
  for (RegionId r = 0; r < grid.region_count(); ++r) {
    EXPECT_EQ(grid.RegionOf(grid.Centroid(r)), r);
  }
}

TEST(TimeSlotTest, TuesdayMorningRush) {
  EXPECT_EQ(TimeSlotOf(LocalTime(1, 8, 30), 8.0), (TimeSlot{Slot::kMorningRush, false}));
}

TEST(TimeSlotTest, SundayLateNight) {
  EXPECT_EQ(TimeSlotOf(LocalTime(6, 2), 8.0), (TimeSlot{Slot::kLateNight, true}));
}

TEST(TimeSlotTest, FridayNoon) {
  EXPECT_EQ(TimeSlotOf(LocalTime(4, 12), 8.0), (TimeSlot{Slot::kOther, false}));
}

TEST(TimeSlotTest, WindowBoundaries) {
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 7), 8.0).slot, Slot::kMorningRush);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 9, 59), 8.0).slot, Slot::kMorningRush);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 10), 8.0).slot, Slot::kOther);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 17), 8.0).slot, Slot::kEveningRush);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 20), 8.0).slot, Slot::kOther);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 23), 8.0).slot, Slot::kLateNight);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 5, 59), 8.0).slot, Slot::kLateNight);
  EXPECT_EQ(TimeSlotOf(LocalTime(0, 6), 8.0).slot, Slot::kOther);
}

TEST(TimeSlotTest, SaturdayStartsAtLocalMidnight) {
  EXPECT_FALSE(TimeSlotOf(LocalTime(4, 23, 59), 8.0).is_weekend);
  EXPECT_TRUE(TimeSlotOf(LocalTime(5, 0), 8.0).is_weekend);
  EXPECT_FALSE(TimeSlotOf(LocalTime(7, 0), 8.0).is_weekend);
}

TEST(TimeSlotTest, PeriodicInDaysAndWeeks) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int64_t> t(0, int64_t{4} * 365 * 86400);
  for (int i = 0; i < 2000; ++i) {
    const UnixSeconds x = 1500000000 + t(rng);
    EXPECT_EQ(TimeSlotOf(x, 8.0).slot, TimeSlotOf(x + 86400, 8.0).slot);
    EXPECT_EQ(TimeSlotOf(x, 8.0), TimeSlotOf(x + 7 * 86400, 8.0));
    EXPECT_EQ(TimeSlotOf(x, 8.0), TimeSlotOf(x - 3 * 7 * 86400, 8.0));
  }
}

TEST(TimeSlotTest, OffsetShiftsLocalHour) {
  // 00:30 UTC is 08:30 at +8 and 00:30 at 0.
  const UnixSeconds t = LocalTime(1, 8, 30);
  EXPECT_EQ(TimeSlotOf(t, 8.0).slot, Slot::kMorningRush);
  EXPECT_EQ(TimeSlotOf(t, 0.0).slot, Slot::kLateNight);
}

TEST(ParseTripsTest, LabelIsPickupMinusOrder) {
  RegionGrid grid = DefaultGrid();
  TripRecord r = MakeRecord(grid, "A", LocalTime(0, 12), 300, 10, 20, 30);
  std::istringstream in(TripsToCsv(std::span<const TripRecord>(&r, 1)));
  ParseResult parsed = ParseTrips(in, grid);
  ASSERT_EQ(parsed.trips.size(), 1u);
  EXPECT_TRUE(parsed.rejections.empty());
  EXPECT_EQ(parsed.trips[0].wt_act_s, 300);
  EXPECT_EQ(parsed.trips[0].o_region, 10);
  EXPECT_EQ(parsed.trips[0].d_region, 20);
  EXPECT_EQ(parsed.trips[0].v_region, 30);
}

TEST(ParseTripsTest, RejectionReasons) {
  RegionGrid grid = DefaultGrid();
  std::vector<TripRecord> rows;
  rows.push_back(MakeRecord(grid, "ok", LocalTime(0, 12), 100, 1, 2, 3));
  TripRecord early = MakeRecord(grid, "early", LocalTime(0, 12), 100, 1, 2, 3);
  early.pickup_time = early.order_time - 5;
  rows.push_back(early);
  TripRecord outside = MakeRecord(grid, "outside", LocalTime(0, 12), 100, 1, 2, 3);
  outside.dispatch_point = {23.5, 114.0};
  rows.push_back(outside);
  TripRecord negative = MakeRecord(grid, "neg", LocalTime(0, 12), 100, 1, 2, 3);
  negative.pick_distance_m = -1.0;
  rows.push_back(negative);
  std::string csv = TripsToCsv(rows);
  csv += "bad,notanumber,D1,22.5,114,1,22.5,114,2,22.5,114,1,1,0\n";
  csv += "short,1,2\n";
  std::istringstream in(csv);
  ParseResult parsed = ParseTrips(in, grid);
  ASSERT_EQ(parsed.trips.size(), 1u);
  EXPECT_EQ(parsed.trips[0].record.order_id, "ok");
  ASSERT_EQ(parsed.rejections.size(), 5u);
  EXPECT_EQ(parsed.rejections[0].row_number, 2);
  EXPECT_EQ(ReasonCode(parsed.rejections[0].reason), "TIME_ORDER");
  EXPECT_EQ(ReasonCode(parsed.rejections[1].reason), "OUT_OF_BBOX");
  EXPECT_EQ(ReasonCode(parsed.rejections[2].reason), "NEGATIVE_DISTANCE");
  EXPECT_EQ(ReasonCode(parsed.rejections[3].reason), "MALFORMED");
  EXPECT_EQ(ReasonCode(parsed.rejections[4].reason), "MALFORMED");
  EXPECT_EQ(parsed.rejections[4].row_number, 6);
}

TEST(ParseTripsTest, DropoffBeforePickupIsTimeOrder) {
  RegionGrid grid = DefaultGrid();
  TripRecord r = MakeRecord(grid, "A", LocalTime(0, 12), 300, 10, 20, 30);
  r.dropoff_time = r.pickup_time - 1;
  RejectReason reason;
  EXPECT_FALSE(LabelTrip(r, grid, &reason).has_value());
  EXPECT_EQ(reason, RejectReason::kTimeOrder);
}

TEST(ParseTripsTest, DuplicateOrderIdIsMalformed) {
  RegionGrid grid = DefaultGrid();
  std::vector<TripRecord> rows = {
      MakeRecord(grid, "A", LocalTime(0, 12), 100, 1, 2, 3),
      MakeRecord(grid, "A", LocalTime(0, 13), 100, 1, 2, 3)};
  std::istringstream in(TripsToCsv(rows));
  ParseResult parsed = ParseTrips(in, grid);
  EXPECT_EQ(parsed.trips.size(), 1u);
  ASSERT_EQ(parsed.rejections.size(), 1u);
  EXPECT_EQ(parsed.rejections[0].reason, RejectReason::kMalformed);
}

TEST(ParseTripsTest, MissingColumnIsFatal) {
  std::istringstream in("order_id,order_time\nA,1\n");
  EXPECT_THROW(ParseTrips(in, DefaultGrid()), DataError);
}

TEST(ParseTripsTest, ColumnsMatchedByNameInAnyOrder) {
  RegionGrid grid = DefaultGrid();
  TripRecord r = MakeRecord(grid, "A", LocalTime(0, 12), 300, 10, 20, 30);
  std::istringstream canonical(TripsToCsv(std::span<const TripRecord>(&r, 1)));
  std::string header, row;
  std::getline(canonical, header);
  std::getline(canonical, row);
  std::vector<std::string> h = SplitCsvLine(header);
  std::vector<std::string> v = SplitCsvLine(row);
  std::string rh = "extra", rv = "x";
  for (size_t i = h.size(); i-- > 0;) {
    rh += "," + h[i];
    rv += "," + v[i];
  }
  std::istringstream in(rh + "\n" + rv + "\n");
  ParseResult parsed = ParseTrips(in, grid);
  ASSERT_EQ(parsed.trips.size(), 1u);
  EXPECT_EQ(parsed.trips[0].record, r);
}

TEST(ParseTripsTest, MissingFileIsIoError) {
  EXPECT_THROW(ParseTripsFile("/nonexistent/trips.csv", DefaultGrid()), IoError);
}

TEST(ParseTripsTest, SyntheticFileHasNoRejections) {
  RegionGrid grid = DefaultGrid();
  SynthConfig cfg;
  cfg.n_trips = 1000;
  SynthOutput out = GenerateTrips(cfg, grid, Calendar());
  std::istringstream in(TripsToCsv(std::span<const TripRecord>(out.trips)));
  ParseResult parsed = ParseTrips(in, grid);
  EXPECT_EQ(parsed.trips.size(), 1000u);
  EXPECT_TRUE(parsed.rejections.empty());
}

TEST(ParseTripsTest, RoundTripPreservesRecords) {
  RegionGrid grid = DefaultGrid();
  SynthConfig cfg;
  cfg.n_trips = 500;
  cfg.seed = 9;
  SynthOutput out = GenerateTrips(cfg, grid, Calendar());
  std::istringstream first(TripsToCsv(std::span<const TripRecord>(out.trips)));
  ParseResult a = ParseTrips(first, grid);
  std::istringstream second(TripsToCsv(std::span<const LabeledTrip>(a.trips)));
  ParseResult b = ParseTrips(second, grid);
  ASSERT_EQ(a.trips.size(), b.trips.size());
  for (size_t i = 0; i < a.trips.size(); ++i) {
    EXPECT_EQ(a.trips[i], b.trips[i]);
    EXPECT_EQ(a.trips[i].record, out.trips[i]);
  }
}

TEST(ParseTripsTest, RejectionReportFormat) {
  std::vector<Rejection> r = {{3, RejectReason::kOutOfBbox, "x"}};
  EXPECT_EQ(RejectionsToCsv(r), "row_number,reason_code\n3,OUT_OF_BBOX\n");
}

std::vector<LabeledTrip> Trips(int n) {
  RegionGrid grid = DefaultGrid();
  std::vector<LabeledTrip> trips;
  for (int i = 0; i < n; ++i) {
    trips.push_back(MakeTrip(grid, "T" + std::to_string(i), LocalTime(0, 0) + i * 60, 100, 1, 2, 3));
  }
  return trips;
}

TEST(ChronoSplitTest, EightyTwenty) {
  SplitResult s = ChronoSplit(Trips(10), 0.8);
  ASSERT_EQ(s.train.size(), 8u);
  ASSERT_EQ(s.test.size(), 2u);
  UnixSeconds max_train = 0;
  for (const auto& t : s.train) max_train = std::max(max_train, t.record.order_time);
  for (const auto& t : s.test) EXPECT_LE(max_train, t.record.order_time);
}

TEST(ChronoSplitTest, SingleTripWarns) {
  SplitResult s = ChronoSplit(Trips(1), 0.5);
  EXPECT_EQ(s.train.size(), 1u);
  EXPECT_TRUE(s.test.empty());
  EXPECT_FALSE(s.warnings.empty());
}

TEST(ChronoSplitTest, ShuffledInputSplitsLikeSorted) {
  std::vector<LabeledTrip> sorted = Trips(37);
  std::vector<LabeledTrip> shuffled = sorted;
  std::mt19937_64 rng(5);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  SplitResult a = ChronoSplit(sorted, 0.7);
  SplitResult b = ChronoSplit(shuffled, 0.7);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size() + a.test.size(), 37u);
}

TEST(ChronoSplitTest, FractionOutsideOpenIntervalIsConfigError) {
  EXPECT_THROW(ChronoSplit(Trips(3), 0.0), ConfigError);
  EXPECT_THROW(ChronoSplit(Trips(3), 1.0), ConfigError);
  EXPECT_THROW(ChronoSplit(Trips(3), -0.5), ConfigError);
}

}  // namespace
}  // namespace waittime
