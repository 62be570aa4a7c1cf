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

#include "waittime/synth.h"

#include <cmath>
#include <sstream>

#include "gtest/gtest.h"
#include "test_util.h"
#include "waittime/error.h"
#include "waittime/gbt.h"

namespace waittime {
namespace {

SynthConfig Small(int64_t n, uint64_t seed = 1) {
  SynthConfig c;
  c.n_trips = n;
  c.seed = seed;
  return c;
}

SynthOutput Generate(const SynthConfig& c) {
  return GenerateTrips(c, testing::DefaultGrid(), Calendar(8.0, SlotWindows{}));
}

void ZeroWeights(SynthConfig& c) {
  c.weights = SynthWeights{0, 0, 0, 0, 0, 0};
}

TEST(SynthTest, ZeroWeightsGiveConstantLabels) {
  SynthConfig c = Small(2000);
  ZeroWeights(c);
  const SynthOutput out = Generate(c);
  ASSERT_EQ(out.trips.size(), 2000u);
  for (size_t i = 0; i < out.trips.size(); ++i) {
    EXPECT_EQ(out.truth[i].wt_s, 100);
    EXPECT_EQ(out.trips[i].pickup_time - out.trips[i].order_time, 100);
  }
}

TEST(SynthTest, PickOnlyLabelsAreAffine) {
  SynthConfig c = Small(5000);
  ZeroWeights(c);
  c.weights.w_pick = 90.0;
  const SynthOutput out = Generate(c);
  FeatureMatrix fm;
  fm.schema = FeatureSchema(Task::kPost, {{"pickDistance"}});
  for (size_t i = 0; i < out.trips.size(); ++i) {
    const double want = 100.0 + 90.0 * out.trips[i].pick_distance_m / 1000.0;
    EXPECT_LE(std::abs(static_cast<double>(out.truth[i].wt_s) - want), 0.5 + 1e-9);
    fm.values.push_back(out.trips[i].pick_distance_m);
    fm.labels.push_back(static_cast<double>(out.truth[i].wt_s));
  }
  const GbtModel m = TrainGbt(fm, GbtParams{});
  const auto pred = PredictGbt(m, fm);
  double mae = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) mae += std::abs(pred[i] - fm.labels[i]);
  mae /= static_cast<double>(pred.size());
  EXPECT_LT(mae, 1.0);
}

TEST(SynthTest, SameSeedIsByteIdentical) {
  const SynthOutput a = Generate(Small(3000, 7));
  const SynthOutput b = Generate(Small(3000, 7));
  const SynthOutput c = Generate(Small(3000, 8));
  EXPECT_EQ(TripsToCsv(std::span<const TripRecord>(a.trips)),
            TripsToCsv(std::span<const TripRecord>(b.trips)));
  EXPECT_EQ(TruthToJson(a).dump(), TruthToJson(b).dump());
  EXPECT_NE(TripsToCsv(std::span<const TripRecord>(a.trips)),
            TripsToCsv(std::span<const TripRecord>(c.trips)));
}

TEST(SynthTest, OutputParsesCleanlyAndMatchesTruth) {
  SynthConfig c = Small(10000, 3);
  const SynthOutput out = Generate(c);
  std::istringstream in(TripsToCsv(std::span<const TripRecord>(out.trips)));
  const ParseResult parsed = ParseTrips(in, testing::DefaultGrid());
  EXPECT_TRUE(parsed.rejections.empty());
  ASSERT_EQ(parsed.trips.size(), out.trips.size());
  const UnixSeconds end = c.start_time + c.weeks * 7 * 86400;
  for (size_t i = 0; i < out.trips.size(); ++i) {
    const SynthTruth& t = out.truth[i];
    EXPECT_EQ(parsed.trips[i].wt_act_s, t.wt_s);
    const double total = t.base + t.pick + t.rush + t.weather + t.demand + t.od_affinity + t.noise;
    EXPECT_EQ(t.wt_s, std::llround(std::max(30.0, total)));
    EXPECT_GE(out.trips[i].order_time, c.start_time);
    EXPECT_LT(out.trips[i].order_time, end);
    if (i > 0) EXPECT_LE(out.trips[i - 1].order_time, out.trips[i].order_time);
  }
}

TEST(SynthTest, LabelMeanFollowsLawOfLargeNumbers) {
  SynthConfig c = Small(20000, 11);
  ZeroWeights(c);
  c.weights.noise_std = 10.0;
  const SynthOutput out = Generate(c);
  const double n = static_cast<double>(out.truth.size());
  double sum = 0.0, sq = 0.0, noise_sq = 0.0;
  for (const SynthTruth& t : out.truth) {
    sum += static_cast<double>(t.wt_s);
    sq += static_cast<double>(t.wt_s) * static_cast<double>(t.wt_s);
    noise_sq += t.noise * t.noise;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 100.0, 3.0 * 10.0 / std::sqrt(n));
  // E[noise^2] = 100 with standard error 100 * sqrt(2 / n).
  EXPECT_NEAR(noise_sq / n, 100.0, 3.0 * 100.0 * std::sqrt(2.0 / n));
}

TEST(SynthTest, DefaultLabelScale) {
  const SynthOutput out = Generate(Small(20000, 2));
  double sum = 0.0;
  for (const SynthTruth& t : out.truth) sum += static_cast<double>(t.wt_s);
  const double mean = sum / static_cast<double>(out.truth.size());
  EXPECT_GT(mean, 120.0);
  EXPECT_LT(mean, 900.0);
}

TEST(SynthTest, ValidateListsEveryViolation) {
  SynthConfig c;
  c.n_trips = 0;
  c.weeks = 0;
  c.weights.noise_std = -1;
  c.hotspots = {{100000, 1.0}};
  c.supply_floor = 0.0;
  try {
    c.Validate(testing::DefaultGrid());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 5u);
  }
}

}  // namespace
}  // namespace waittime
