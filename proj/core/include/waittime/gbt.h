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

#ifndef WAITTIME_GBT_H_
#define WAITTIME_GBT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/feature_base.h"

namespace waittime {

inline constexpr int kGbtModelVersion = 1;

struct GbtParams {
  int num_trees = 200;
  double learning_rate = 0.1;
  int max_depth = 6;
  double lambda = 1.0;  // L2 penalty on leaf weights
  double gamma = 0.0;   // minimum split gain
  double min_child_weight = 1.0;
  int max_bins = 256;
  uint64_t seed = 0;

  // Throws ConfigError listing every violation.
  void Validate() const;
  nlohmann::json ToJson() const;
  static GbtParams FromJson(const nlohmann::json& j);

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

// Flat tree node. Internal nodes send a row left iff value <= threshold.
struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double weight = 0.0;  // leaves only
  double gain = 0.0;    // internal nodes only

  bool IsLeaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double Predict(std::span<const double> row) const;
  // Index of the leaf reached by `row`.
  int LeafIndex(std::span<const double> row) const;
  int Depth() const;
};

struct GbtModel {
  double base_score = 0.0;
  std::vector<Tree> trees;
  GbtParams params;
  std::string schema_fingerprint;
  std::vector<std::string> feature_names;
  // Total accepted split gain per feature; unused features hold 0.
  std::map<std::string, double> importance;

  // base_score + learning_rate * sum of tree outputs.
  double PredictRow(std::span<const double> row) const;
};

struct TrainOptions {
  // Split search threads. Results do not depend on this value.
  int num_threads = 1;
};

// Squared-loss boosting with second-order split gain
//   0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma
// and leaf weights -G/(H+l). Candidate thresholds are midpoints between
// adjacent quantile bins (exact greedy when max_bins >= distinct values).
// Ties break on the lowest feature index, then the lowest threshold.
// Throws ConfigError on bad params and DataError on empty or non-finite data.
GbtModel TrainGbt(const FeatureMatrix& fm, const GbtParams& params,
                  const TrainOptions& options = {});

// Throws DataError when the schema fingerprint differs from the model's or a
// value is non-finite.
std::vector<double> PredictGbt(const GbtModel& model, const FeatureMatrix& fm);

// Gains normalized to sum to 1, sorted descending; ties keep feature order.
// Empty when the model has no splits.
std::vector<std::pair<std::string, double>> RankedImportance(
    const GbtModel& model);

nlohmann::json ModelToJson(const GbtModel& model,
                           std::optional<std::string> created_at = std::nullopt);
GbtModel ModelFromJson(const nlohmann::json& j);
void SaveModel(const GbtModel& model, const std::filesystem::path& path,
               std::optional<std::string> created_at = std::nullopt);
// Throws DataError on malformed JSON or a version mismatch.
GbtModel LoadModel(const std::filesystem::path& path);

}  // namespace waittime

#endif  // WAITTIME_GBT_H_
