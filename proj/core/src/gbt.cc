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

#include "waittime/gbt.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <thread>

#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {

void GbtParams::Validate() const {
  std::vector<std::string> v;
  if (num_trees < 0) v.push_back("gbt.num_trees: must be >= 0");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    v.push_back("gbt.learning_rate: must be in (0, 1]");
  }
  if (max_depth <= 0) v.push_back("gbt.max_depth: must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    v.push_back("gbt.lambda: must be >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    v.push_back("gbt.gamma: must be >= 0");
  }
  if (!(min_child_weight >= 0.0) || !std::isfinite(min_child_weight)) {
    v.push_back("gbt.min_child_weight: must be >= 0");
  }
  if (max_bins < 2 || max_bins > 65535) {
    v.push_back("gbt.max_bins: must be in [2, 65535]");
  }
  if (!v.empty()) throw ConfigError(std::move(v));
}

nlohmann::json GbtParams::ToJson() const {
  return {{"num_trees", num_trees},
          {"learning_rate", learning_rate},
          {"max_depth", max_depth},
          {"lambda", lambda},
          {"gamma", gamma},
          {"min_child_weight", min_child_weight},
          {"max_bins", max_bins},
          {"seed", seed}};
}

GbtParams GbtParams::FromJson(const nlohmann::json& j) {
  GbtParams p;
  p.num_trees = j.at("num_trees").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_depth = j.at("max_depth").get<int>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.max_bins = j.at("max_bins").get<int>();
  p.seed = j.at("seed").get<uint64_t>();
  return p;
}

int Tree::LeafIndex(std::span<const double> row) const {
  int i = 0;
  while (!nodes[i].IsLeaf()) {
    const TreeNode& n = nodes[i];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

double Tree::Predict(std::span<const double> row) const {
  return nodes[LeafIndex(row)].weight;
}

int Tree::Depth() const {
  std::function<int(int)> depth = [&](int i) -> int {
    if (nodes[i].IsLeaf()) return 0;
    return 1 + std::max(depth(nodes[i].left), depth(nodes[i].right));
  };
  return nodes.empty() ? 0 : depth(0);
}

double GbtModel::PredictRow(std::span<const double> row) const {
  double sum = 0.0;
  for (const Tree& t : trees) sum += t.Predict(row);
  return base_score + params.learning_rate * sum;
}

namespace {

// Per-feature quantile bins. Bin b holds the values in
// (thresholds[b-1], thresholds[b]].
struct BinnedFeature {
  std::vector<double> thresholds;
  std::vector<uint16_t> codes;
  int num_bins() const { return static_cast<int>(thresholds.size()) + 1; }
};

double Midpoint(double a, double b) {
  const double m = a + (b - a) / 2.0;
  // Adjacent doubles: fall back to the lower value so the partition holds.
  return (m >= a && m < b) ? m : a;
}

BinnedFeature BinFeature(const std::vector<double>& column, int max_bins) {
  const size_t n = column.size();
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  std::vector<size_t> cumulative;  // inclusive row count up to each value
  for (size_t i = 0; i < n; ++i) {
    if (distinct.empty() || sorted[i] != distinct.back()) {
      distinct.push_back(sorted[i]);
      cumulative.push_back(0);
    }
    cumulative.back() = i + 1;
  }

  std::vector<int> bin_of(distinct.size());
  if (distinct.size() <= static_cast<size_t>(max_bins)) {
    std::iota(bin_of.begin(), bin_of.end(), 0);
  } else {
    int prev = -1;
    int next_id = -1;
    for (size_t j = 0; j < distinct.size(); ++j) {
      const int raw = static_cast<int>(std::min<size_t>(
          max_bins - 1, (cumulative[j] - 1) * static_cast<size_t>(max_bins) / n));
      if (raw != prev) {
        ++next_id;
        prev = raw;
      }
      bin_of[j] = next_id;
    }
  }

  BinnedFeature out;
  std::vector<double> upper;  // largest value of each bin
  for (size_t j = 0; j < distinct.size(); ++j) {
    if (j + 1 < distinct.size() && bin_of[j + 1] != bin_of[j]) {
      out.thresholds.push_back(Midpoint(distinct[j], distinct[j + 1]));
      upper.push_back(distinct[j]);
    }
  }
  upper.push_back(distinct.back());
  out.codes.resize(n);
  for (size_t i = 0; i < n; ++i) {
    out.codes[i] = static_cast<uint16_t>(
        std::lower_bound(upper.begin(), upper.end(), column[i]) - upper.begin());
  }
  return out;
}

struct BinStat {
  double g = 0.0;
  double h = 0.0;
  int64_t n = 0;
};

struct SplitCandidate {
  double gain = 0.0;
  int feature = -1;
  int bin = -1;  // rows with code <= bin go left
};

void ParallelFor(int num_threads, int n, const std::function<void(int, int)>& fn) {
  const int workers = std::clamp(num_threads, 1, std::max(n, 1));
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int begin = static_cast<int>(int64_t{n} * w / workers);
    const int end = static_cast<int>(int64_t{n} * (w + 1) / workers);
    threads.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

class TreeGrower {
 public:
  TreeGrower(const std::vector<BinnedFeature>& bins, const GbtParams& params,
             int num_threads)
      : bins_(bins), params_(params), num_threads_(num_threads) {
    offsets_.reserve(bins.size() + 1);
    offsets_.push_back(0);
    for (const BinnedFeature& b : bins) {
      offsets_.push_back(offsets_.back() + b.num_bins());
    }
  }

  // Grows one tree on (grad, hess). `leaf_rows` receives, for every leaf,
  // the rows routed to it.
  Tree Grow(const std::vector<double>& grad, const std::vector<double>& hess,
            std::vector<double>& feature_gain,
            std::vector<std::pair<int, std::vector<uint32_t>>>& leaf_rows) {
    grad_ = &grad;
    hess_ = &hess;
    gain_ = &feature_gain;
    leaf_rows_ = &leaf_rows;
    leaf_rows.clear();
    const size_t n = grad.size();
    rows_.resize(n);
    std::iota(rows_.begin(), rows_.end(), 0u);
    scratch_.resize(n);
    tree_ = Tree{};
    tree_.nodes.emplace_back();
    std::vector<BinStat> hist(offsets_.back());
    BuildHistogram(0, n, hist);
    GrowNode(0, 0, n, 0, hist);
    return std::move(tree_);
  }

 private:
  void BuildHistogram(size_t begin, size_t end, std::vector<BinStat>& hist) const {
    const int num_features = static_cast<int>(bins_.size());
    ParallelFor(num_threads_, num_features, [&](int f0, int f1) {
      for (int f = f0; f < f1; ++f) {
        BinStat* h = hist.data() + offsets_[f];
        std::fill(h, h + bins_[f].num_bins(), BinStat{});
        const uint16_t* codes = bins_[f].codes.data();
        for (size_t k = begin; k < end; ++k) {
          const uint32_t r = rows_[k];
          BinStat& s = h[codes[r]];
          s.g += (*grad_)[r];
          s.h += (*hess_)[r];
          ++s.n;
        }
      }
    });
  }

  SplitCandidate FindSplit(const std::vector<BinStat>& hist, double g_total,
                           double h_total, int64_t n_total) const {
    const int num_features = static_cast<int>(bins_.size());
    const double lambda = params_.lambda;
    const double parent = g_total * g_total / (h_total + lambda);
    std::vector<SplitCandidate> best(num_features);
    ParallelFor(num_threads_, num_features, [&](int f0, int f1) {
      for (int f = f0; f < f1; ++f) {
        const BinStat* h = hist.data() + offsets_[f];
        SplitCandidate cand;
        double gl = 0.0;
        double hl = 0.0;
        int64_t nl = 0;
        for (int b = 0; b + 1 < bins_[f].num_bins(); ++b) {
          gl += h[b].g;
          hl += h[b].h;
          nl += h[b].n;
          if (h[b].n == 0) continue;  // same partition as the previous bin
          const int64_t nr = n_total - nl;
          if (nl == 0 || nr == 0) continue;
          const double gr = g_total - gl;
          const double hr = h_total - hl;
          if (hl < params_.min_child_weight || hr < params_.min_child_weight) {
            continue;
          }
          const double gain = 0.5 * (gl * gl / (hl + lambda) +
                                     gr * gr / (hr + lambda) - parent) -
                              params_.gamma;
          if (gain > cand.gain) {
            cand.gain = gain;
            cand.feature = f;
            cand.bin = b;
          }
        }
        best[f] = cand;
      }
    });
    SplitCandidate out;
    for (const SplitCandidate& c : best) {
      if (c.feature >= 0 && c.gain > out.gain) out = c;
    }
    return out;
  }

  void GrowNode(int node, size_t begin, size_t end, int depth,
                std::vector<BinStat>& hist) {
    double g = 0.0;
    double h = 0.0;
    for (size_t k = begin; k < end; ++k) {
      g += (*grad_)[rows_[k]];
      h += (*hess_)[rows_[k]];
    }
    const int64_t count = static_cast<int64_t>(end - begin);
    SplitCandidate split;
    if (depth < params_.max_depth && count >= 2) {
      split = FindSplit(hist, g, h, count);
    }
    if (split.feature < 0) {
      tree_.nodes[node].weight = -g / (h + params_.lambda);
      leaf_rows_->emplace_back(
          node, std::vector<uint32_t>(rows_.begin() + begin, rows_.begin() + end));
      return;
    }

    // Stable partition keeps ascending row order inside every node.
    const uint16_t* codes = bins_[split.feature].codes.data();
    size_t left_end = begin;
    size_t right_fill = 0;
    for (size_t k = begin; k < end; ++k) {
      const uint32_t r = rows_[k];
      if (codes[r] <= split.bin) {
        rows_[left_end++] = r;
      } else {
        scratch_[right_fill++] = r;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + right_fill,
              rows_.begin() + left_end);

    const int left = static_cast<int>(tree_.nodes.size());
    const int right = left + 1;
    {
      TreeNode& parent = tree_.nodes[node];
      parent.feature = split.feature;
      parent.threshold = bins_[split.feature].thresholds[split.bin];
      parent.gain = split.gain;
      parent.left = left;
      parent.right = right;
    }
    tree_.nodes.emplace_back();
    tree_.nodes.emplace_back();
    (*gain_)[split.feature] += split.gain;

    // Histogram the smaller child; the larger one is parent minus smaller.
    const bool left_smaller = (left_end - begin) <= (end - left_end);
    std::vector<BinStat> small(hist.size());
    if (left_smaller) {
      BuildHistogram(begin, left_end, small);
    } else {
      BuildHistogram(left_end, end, small);
    }
    for (size_t i = 0; i < hist.size(); ++i) {
      hist[i].g -= small[i].g;
      hist[i].h -= small[i].h;
      hist[i].n -= small[i].n;
    }
    if (left_smaller) {
      GrowNode(left, begin, left_end, depth + 1, small);
      GrowNode(right, left_end, end, depth + 1, hist);
    } else {
      GrowNode(left, begin, left_end, depth + 1, hist);
      GrowNode(right, left_end, end, depth + 1, small);
    }
  }

  const std::vector<BinnedFeature>& bins_;
  const GbtParams& params_;
  int num_threads_;
  std::vector<size_t> offsets_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<double>* gain_ = nullptr;
  std::vector<std::pair<int, std::vector<uint32_t>>>* leaf_rows_ = nullptr;
  std::vector<uint32_t> rows_;
  std::vector<uint32_t> scratch_;
  Tree tree_;
};

}  // namespace

GbtModel TrainGbt(const FeatureMatrix& fm, const GbtParams& params,
                  const TrainOptions& options) {
  params.Validate();
  fm.Validate();
  const size_t n = fm.rows();
  const size_t d = fm.cols();
  if (n == 0) throw DataError("gbt train: empty feature matrix");
  if (n > UINT32_MAX) throw DataError("gbt train: too many rows");

  GbtModel model;
  model.params = params;
  model.schema_fingerprint = fm.schema.Fingerprint();
  model.feature_names = fm.schema.names();
  double sum = 0.0;
  for (double y : fm.labels) sum += y;
  model.base_score = sum / static_cast<double>(n);

  std::vector<BinnedFeature> bins(d);
  ParallelFor(options.num_threads, static_cast<int>(d), [&](int f0, int f1) {
    for (int f = f0; f < f1; ++f) bins[f] = BinFeature(fm.Column(f), params.max_bins);
  });

  std::vector<double> pred(n, model.base_score);
  std::vector<double> grad(n);
  // Squared loss 0.5 * (y - p)^2 has unit hessian.
  const std::vector<double> hess(n, 1.0);
  std::vector<double> feature_gain(d, 0.0);
  std::vector<std::pair<int, std::vector<uint32_t>>> leaf_rows;
  TreeGrower grower(bins, params, options.num_threads);
  for (int t = 0; t < params.num_trees; ++t) {
    for (size_t i = 0; i < n; ++i) grad[i] = pred[i] - fm.labels[i];
    Tree tree = grower.Grow(grad, hess, feature_gain, leaf_rows);
    for (const auto& [leaf, rows] : leaf_rows) {
      const double step = params.learning_rate * tree.nodes[leaf].weight;
      for (uint32_t r : rows) pred[r] += step;
    }
    model.trees.push_back(std::move(tree));
  }
  for (size_t f = 0; f < d; ++f) {
    model.importance[model.feature_names[f]] = feature_gain[f];
  }
  return model;
}

std::vector<double> PredictGbt(const GbtModel& model, const FeatureMatrix& fm) {
  if (fm.schema.Fingerprint() != model.schema_fingerprint) {
    throw DataError("predict: feature schema fingerprint " +
                    fm.schema.Fingerprint() + " does not match model " +
                    model.schema_fingerprint);
  }
  if (fm.values.size() != fm.rows() * fm.cols()) {
    throw DataError("predict: feature matrix shape mismatch");
  }
  for (double v : fm.values) {
    if (!std::isfinite(v)) throw DataError("predict: non-finite feature value");
  }
  std::vector<double> out(fm.rows());
  for (size_t i = 0; i < fm.rows(); ++i) out[i] = model.PredictRow(fm.Row(i));
  return out;
}

std::vector<std::pair<std::string, double>> RankedImportance(
    const GbtModel& model) {
  double total = 0.0;
  for (const std::string& name : model.feature_names) {
    auto it = model.importance.find(name);
    if (it != model.importance.end()) total += it->second;
  }
  std::vector<std::pair<std::string, double>> out;
  if (!(total > 0.0)) return out;
  for (const std::string& name : model.feature_names) {
    auto it = model.importance.find(name);
    out.emplace_back(name, it == model.importance.end() ? 0.0 : it->second / total);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  return out;
}

nlohmann::json ModelToJson(const GbtModel& model,
                           std::optional<std::string> created_at) {
  nlohmann::json trees = nlohmann::json::array();
  for (const Tree& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.nodes) {
      if (n.IsLeaf()) {
        nodes.push_back({{"leaf", n.weight}});
      } else {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"gain", n.gain},
                         {"left", n.left},
                         {"right", n.right}});
      }
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  nlohmann::json j = {{"version", kGbtModelVersion},
                      {"params", model.params.ToJson()},
                      {"base_score", model.base_score},
                      {"schema_fingerprint", model.schema_fingerprint},
                      {"feature_names", model.feature_names},
                      {"trees", std::move(trees)},
                      {"importance", model.importance}};
  if (created_at) j["created_at"] = *created_at;
  return j;
}

GbtModel ModelFromJson(const nlohmann::json& j) {
  try {
    const int version = j.at("version").get<int>();
    if (version != kGbtModelVersion) {
      throw DataError("model version " + std::to_string(version) +
                      " is not supported (expected " +
                      std::to_string(kGbtModelVersion) + ")");
    }
    GbtModel m;
    m.params = GbtParams::FromJson(j.at("params"));
    m.params.Validate();
    m.base_score = j.at("base_score").get<double>();
    m.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    const int d = static_cast<int>(m.feature_names.size());
    for (const auto& jt : j.at("trees")) {
      Tree t;
      for (const auto& jn : jt.at("nodes")) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.weight = jn.at("leaf").get<double>();
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.gain = jn.at("gain").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
        }
        t.nodes.push_back(n);
      }
      const int size = static_cast<int>(t.nodes.size());
      if (size == 0) throw DataError("model: empty tree");
      for (int i = 0; i < size; ++i) {
        const TreeNode& n = t.nodes[i];
        if (n.IsLeaf()) continue;
        // Children always follow their parent, which rules out cycles.
        if (n.feature >= d || n.left <= i || n.right <= i || n.left >= size ||
            n.right >= size) {
          throw DataError("model: invalid node " + std::to_string(i));
        }
      }
      m.trees.push_back(std::move(t));
    }
    for (const auto& [name, gain] : j.at("importance").items()) {
      m.importance[name] = gain.get<double>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model params: ") + e.what());
  }
}

void SaveModel(const GbtModel& model, const std::filesystem::path& path,
               std::optional<std::string> created_at) {
  WriteFileAtomic(path, ModelToJson(model, std::move(created_at)).dump(1) + "\n");
}

GbtModel LoadModel(const std::filesystem::path& path) {
  const std::string text = ReadFile(path);
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw DataError("model: malformed JSON in " + path.string());
  }
  return ModelFromJson(j);
}

}  // namespace waittime
