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

#ifndef WAITTIME_INTERACTIONS_H_
#define WAITTIME_INTERACTIONS_H_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/feature_base.h"
#include "waittime/trip_data.h"

namespace waittime {

// Which trip attribute plays the "user" and which tuple plays the "item" in a
// co-occurrence matrix, e.g. "O->D,rush" or "driver->O,D".
struct CfSpec {
  enum class User { kO, kD, kV, kDriver };
  enum class Part { kO, kD, kRush, kWeekend };

  User user = User::kO;
  std::vector<Part> item;

  // Parses "<user>-><part>[,<part>...]"; user in {O, D, V, driver}, parts in
  // {O, D, rush, weekend}. Throws ConfigError.
  static CfSpec Parse(std::string_view text);
  std::string ToString() const;
  // Identifier-safe form used in column names, e.g. "O_to_D_rush".
  std::string ColumnStem() const;
  // True when neither the user nor the item needs the assigned vehicle.
  bool PreEligible() const;

  std::string UserKey(const LabeledTrip& trip) const;
  std::string ItemKey(const LabeledTrip& trip, const Calendar& calendar) const;

  friend bool operator==(const CfSpec&, const CfSpec&) = default;
};

// Sparse non-negative counts of (user key, item key) pairs. Stored counts are
// always >= 1; absent pairs mean 0.
class CooccurrenceMatrix {
 public:
  struct Entry {
    int32_t user;
    int32_t item;
    int64_t count;
  };

  CooccurrenceMatrix() = default;
  explicit CooccurrenceMatrix(CfSpec spec) : spec_(std::move(spec)) {}

  const CfSpec& spec() const { return spec_; }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::string>& users() const { return users_; }
  const std::vector<std::string>& items() const { return items_; }
  // Sorted by (user, item).
  const std::vector<Entry>& entries() const { return entries_; }

  int32_t UserIndex(const std::string& key) const;  // -1 when unknown
  int32_t ItemIndex(const std::string& key) const;
  int64_t Count(const std::string& user, const std::string& item) const;

  // Adds one observation; used while building.
  void Add(const std::string& user, const std::string& item);
  void Finalize();

  nlohmann::json ToJson() const;
  static CooccurrenceMatrix FromJson(const nlohmann::json& j);

 private:
  static uint64_t Key(int32_t u, int32_t i) {
    return (static_cast<uint64_t>(static_cast<uint32_t>(u)) << 32) |
           static_cast<uint32_t>(i);
  }

  CfSpec spec_;
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::unordered_map<std::string, int32_t> user_index_;
  std::unordered_map<std::string, int32_t> item_index_;
  std::unordered_map<uint64_t, int64_t> counts_;
  std::vector<Entry> entries_;
};

CooccurrenceMatrix BuildCooccurrence(std::span<const LabeledTrip> train,
                                     const CfSpec& spec,
                                     const Calendar& calendar);

struct MfParams {
  int rank = 8;
  int epochs = 50;
  double lr = 0.05;
  double reg = 0.01;
  uint64_t seed = 7;
};

// Biasless matrix factorization of log1p(counts):
// affinity(u, i) = global_mean + <user_vecs[u], item_vecs[i]>.
struct LatentFactorModel {
  int rank = 0;
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::unordered_map<std::string, int32_t> user_index;
  std::unordered_map<std::string, int32_t> item_index;
  std::vector<double> user_vecs;  // |users| x rank
  std::vector<double> item_vecs;  // |items| x rank
  double global_mean = 0.0;
  std::vector<double> train_rmse_history;

  double Affinity(int32_t user, int32_t item) const;
  // Unknown user or item yields global_mean.
  double Affinity(const std::string& user, const std::string& item) const;

  nlohmann::json ToJson() const;
  static LatentFactorModel FromJson(const nlohmann::json& j);
};

// SGD on the squared error of log1p(count) over the stored entries, with L2
// penalty `reg` on both vectors. Throws ConfigError for non-positive rank,
// epochs or learning rate and DataError for an empty matrix.
LatentFactorModel TrainMf(const CooccurrenceMatrix& m, const MfParams& params);

struct RegionDistances {
  double manhattan_cells = 0.0;
  double euclidean_cells = 0.0;
  double geo_km = 0.0;
};

// Grid-cell and centroid-haversine distances between two regions. Throws
// OutOfBounds for invalid ids.
RegionDistances ComputeRegionDistances(RegionId a, RegionId b,
                                       const RegionGrid& grid);

struct KMeansParams {
  int k = 10;
  int max_iter = 100;
  uint64_t seed = 11;
};

// K-means over per-region vectors [lat, lng, log1p(origin count)], each
// min-max normalized to [0, 1] across the regions seen as origins in train.
struct RegionClusterModel {
  int k = 0;
  std::vector<std::array<double, 3>> centroids;
  std::map<RegionId, int> assignment;
  std::map<RegionId, int64_t> origin_counts;
  // Normalization ranges: lat, lng, log1p(count).
  std::array<double, 3> lo{};
  std::array<double, 3> hi{};
  std::vector<double> inertia_history;

  std::array<double, 3> Embed(RegionId region, const RegionGrid& grid) const;
  // Nearest centroid; ties go to the lowest cluster id.
  int Nearest(const std::array<double, 3>& v) const;
  // Fitted assignment when known, nearest centroid otherwise.
  int ClusterOf(RegionId region, const RegionGrid& grid) const;

  nlohmann::json ToJson() const;
  static RegionClusterModel FromJson(const nlohmann::json& j);
};

// Lloyd iterations with k-means++ seeding. Throws ConfigError when fewer than
// k regions have an origin in train or k/max_iter are not positive.
RegionClusterModel FitRegionClusters(std::span<const LabeledTrip> train,
                                     const RegionGrid& grid,
                                     const KMeansParams& params);

struct InteractionConfig {
  std::vector<CfSpec> pre_specs = {CfSpec::Parse("O->D"),
                                   CfSpec::Parse("O->D,rush"),
                                   CfSpec::Parse("D->O,rush")};
  std::vector<CfSpec> post_specs = {CfSpec::Parse("V->O,rush"),
                                    CfSpec::Parse("driver->O,D"),
                                    CfSpec::Parse("driver->O,D,rush")};
  MfParams mf;
  KMeansParams kmeans;

  // Throws ConfigError listing every violation.
  void Validate() const;
  std::string Canonical() const;
};

struct CfFeatureModel {
  CooccurrenceMatrix counts;
  LatentFactorModel factors;
};

// Everything the interaction featurizer needs, fitted on one train window.
struct InteractionModels {
  InteractionConfig config;
  std::string grid_fingerprint;
  std::vector<CfFeatureModel> pre_cf;
  std::vector<CfFeatureModel> post_cf;
  std::unordered_map<std::string, int64_t> od_counts;
  std::unordered_map<std::string, int64_t> odr_counts;
  RegionClusterModel clusters;

  std::string Fingerprint() const;
  nlohmann::json ToJson() const;
  static InteractionModels FromJson(const nlohmann::json& j);
};

InteractionModels FitInteractions(std::span<const LabeledTrip> train,
                                  const RegionGrid& grid,
                                  const Calendar& calendar,
                                  const InteractionConfig& config);

// Columns appended after the base features, in row order.
std::vector<FeatureColumn> InteractionColumns(Task task,
                                              const InteractionConfig& config);

// Appends the interaction extension for `trip`. PRE output never reads the
// driver id, dispatch point or pick distance. With `exclude_self` the trip is
// taken to be one of the fitted trips and its own occurrence is removed from
// the count columns. Throws DataError when the models were fitted for a
// different grid.
void FeaturizeInteractions(const LabeledTrip& trip, Task task,
                           const InteractionModels& models,
                           const RegionGrid& grid, const Calendar& calendar,
                           std::vector<double>& out, bool exclude_self = false);

}  // namespace waittime

#endif  // WAITTIME_INTERACTIONS_H_
