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

#include "waittime/interactions.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "waittime/error.h"
#include "waittime/geo.h"
#include "waittime/util.h"

namespace waittime {

// ---------------------------------------------------------------------------
// CfSpec

namespace {

std::string Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string_view UserName(CfSpec::User u) {
  switch (u) {
    case CfSpec::User::kO: return "O";
    case CfSpec::User::kD: return "D";
    case CfSpec::User::kV: return "V";
    case CfSpec::User::kDriver: return "driver";
  }
  return "O";
}

std::string_view PartName(CfSpec::Part p) {
  switch (p) {
    case CfSpec::Part::kO: return "O";
    case CfSpec::Part::kD: return "D";
    case CfSpec::Part::kRush: return "rush";
    case CfSpec::Part::kWeekend: return "weekend";
  }
  return "O";
}

}  // namespace

CfSpec CfSpec::Parse(std::string_view text) {
  const size_t arrow = text.find("->");
  if (arrow == std::string_view::npos) {
    throw ConfigError("cf spec '" + std::string(text) + "': missing '->'");
  }
  CfSpec spec;
  const std::string user = Trim(text.substr(0, arrow));
  if (user == "O") {
    spec.user = User::kO;
  } else if (user == "D") {
    spec.user = User::kD;
  } else if (user == "V") {
    spec.user = User::kV;
  } else if (user == "driver") {
    spec.user = User::kDriver;
  } else {
    throw ConfigError("cf spec '" + std::string(text) + "': unknown user '" +
                      user + "'");
  }
  std::string_view rest = text.substr(arrow + 2);
  while (true) {
    const size_t comma = rest.find(',');
    const std::string part = Trim(rest.substr(0, comma));
    if (part == "O") {
      spec.item.push_back(Part::kO);
    } else if (part == "D") {
      spec.item.push_back(Part::kD);
    } else if (part == "rush") {
      spec.item.push_back(Part::kRush);
    } else if (part == "weekend") {
      spec.item.push_back(Part::kWeekend);
    } else {
      throw ConfigError("cf spec '" + std::string(text) +
                        "': unknown item part '" + part + "'");
    }
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return spec;
}

std::string CfSpec::ToString() const {
  std::string out(UserName(user));
  out += "->";
  for (size_t i = 0; i < item.size(); ++i) {
    if (i > 0) out += ',';
    out += PartName(item[i]);
  }
  return out;
}

std::string CfSpec::ColumnStem() const {
  std::string out(UserName(user));
  out += "_to";
  for (Part p : item) {
    out += '_';
    out += PartName(p);
  }
  return out;
}

bool CfSpec::PreEligible() const {
  return user == User::kO || user == User::kD;
}

std::string CfSpec::UserKey(const LabeledTrip& trip) const {
  switch (user) {
    case User::kO: return std::to_string(trip.o_region);
    case User::kD: return std::to_string(trip.d_region);
    case User::kV: return std::to_string(trip.v_region);
    case User::kDriver: return trip.record.driver_id;
  }
  return {};
}

std::string CfSpec::ItemKey(const LabeledTrip& trip,
                            const Calendar& calendar) const {
  std::string out;
  for (size_t i = 0; i < item.size(); ++i) {
    if (i > 0) out += '|';
    switch (item[i]) {
      case Part::kO: out += std::to_string(trip.o_region); break;
      case Part::kD: out += std::to_string(trip.d_region); break;
      case Part::kRush:
        out += std::to_string(
            static_cast<int>(calendar.SlotOf(trip.record.order_time).slot));
        break;
      case Part::kWeekend:
        out += calendar.SlotOf(trip.record.order_time).is_weekend ? '1' : '0';
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CooccurrenceMatrix

int32_t CooccurrenceMatrix::UserIndex(const std::string& key) const {
  auto it = user_index_.find(key);
  return it == user_index_.end() ? -1 : it->second;
}

int32_t CooccurrenceMatrix::ItemIndex(const std::string& key) const {
  auto it = item_index_.find(key);
  return it == item_index_.end() ? -1 : it->second;
}

int64_t CooccurrenceMatrix::Count(const std::string& user,
                                  const std::string& item) const {
  const int32_t u = UserIndex(user);
  const int32_t i = ItemIndex(item);
  if (u < 0 || i < 0) return 0;
  auto it = counts_.find(Key(u, i));
  return it == counts_.end() ? 0 : it->second;
}

void CooccurrenceMatrix::Add(const std::string& user, const std::string& item) {
  auto [uit, u_new] =
      user_index_.emplace(user, static_cast<int32_t>(users_.size()));
  if (u_new) users_.push_back(user);
  auto [iit, i_new] =
      item_index_.emplace(item, static_cast<int32_t>(items_.size()));
  if (i_new) items_.push_back(item);
  ++counts_[Key(uit->second, iit->second)];
}

void CooccurrenceMatrix::Finalize() {
  entries_.clear();
  entries_.reserve(counts_.size());
  for (const auto& [key, count] : counts_) {
    entries_.push_back({static_cast<int32_t>(key >> 32),
                        static_cast<int32_t>(key & 0xffffffffu), count});
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) {
              return a.user != b.user ? a.user < b.user : a.item < b.item;
            });
}

nlohmann::json CooccurrenceMatrix::ToJson() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const Entry& e : entries_) entries.push_back({e.user, e.item, e.count});
  return {{"spec", spec_.ToString()},
          {"users", users_},
          {"items", items_},
          {"entries", std::move(entries)}};
}

CooccurrenceMatrix CooccurrenceMatrix::FromJson(const nlohmann::json& j) {
  try {
    CooccurrenceMatrix m(CfSpec::Parse(j.at("spec").get<std::string>()));
    m.users_ = j.at("users").get<std::vector<std::string>>();
    m.items_ = j.at("items").get<std::vector<std::string>>();
    for (size_t i = 0; i < m.users_.size(); ++i) {
      m.user_index_[m.users_[i]] = static_cast<int32_t>(i);
    }
    for (size_t i = 0; i < m.items_.size(); ++i) {
      m.item_index_[m.items_[i]] = static_cast<int32_t>(i);
    }
    for (const auto& e : j.at("entries")) {
      const int32_t u = e.at(0).get<int32_t>();
      const int32_t i = e.at(1).get<int32_t>();
      const int64_t c = e.at(2).get<int64_t>();
      if (u < 0 || i < 0 || u >= static_cast<int32_t>(m.users_.size()) ||
          i >= static_cast<int32_t>(m.items_.size()) || c < 1) {
        throw DataError("cooccurrence: invalid entry");
      }
      m.counts_[Key(u, i)] = c;
    }
    m.Finalize();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("cooccurrence: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("cooccurrence: ") + e.what());
  }
}

CooccurrenceMatrix BuildCooccurrence(std::span<const LabeledTrip> train,
                                     const CfSpec& spec,
                                     const Calendar& calendar) {
  CooccurrenceMatrix m(spec);
  for (const LabeledTrip& t : train) {
    m.Add(spec.UserKey(t), spec.ItemKey(t, calendar));
  }
  m.Finalize();
  return m;
}

// ---------------------------------------------------------------------------
// Matrix factorization

double LatentFactorModel::Affinity(int32_t user, int32_t item) const {
  const double* p = user_vecs.data() + static_cast<size_t>(user) * rank;
  const double* q = item_vecs.data() + static_cast<size_t>(item) * rank;
  double dot = 0.0;
  for (int f = 0; f < rank; ++f) dot += p[f] * q[f];
  return global_mean + dot;
}

double LatentFactorModel::Affinity(const std::string& user,
                                   const std::string& item) const {
  auto u = user_index.find(user);
  auto i = item_index.find(item);
  if (u == user_index.end() || i == item_index.end()) return global_mean;
  return Affinity(u->second, i->second);
}

nlohmann::json LatentFactorModel::ToJson() const {
  return {{"rank", rank},
          {"users", users},
          {"items", items},
          {"user_vecs", user_vecs},
          {"item_vecs", item_vecs},
          {"global_mean", global_mean},
          {"train_rmse_history", train_rmse_history}};
}

LatentFactorModel LatentFactorModel::FromJson(const nlohmann::json& j) {
  try {
    LatentFactorModel m;
    m.rank = j.at("rank").get<int>();
    m.users = j.at("users").get<std::vector<std::string>>();
    m.items = j.at("items").get<std::vector<std::string>>();
    m.user_vecs = j.at("user_vecs").get<std::vector<double>>();
    m.item_vecs = j.at("item_vecs").get<std::vector<double>>();
    m.global_mean = j.at("global_mean").get<double>();
    m.train_rmse_history = j.at("train_rmse_history").get<std::vector<double>>();
    if (m.rank <= 0 || m.user_vecs.size() != m.users.size() * m.rank ||
        m.item_vecs.size() != m.items.size() * m.rank) {
      throw DataError("latent factor model: inconsistent shapes");
    }
    for (size_t i = 0; i < m.users.size(); ++i) {
      m.user_index[m.users[i]] = static_cast<int32_t>(i);
    }
    for (size_t i = 0; i < m.items.size(); ++i) {
      m.item_index[m.items[i]] = static_cast<int32_t>(i);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("latent factor model: ") + e.what());
  }
}

LatentFactorModel TrainMf(const CooccurrenceMatrix& m, const MfParams& params) {
  std::vector<std::string> violations;
  if (params.rank <= 0) violations.push_back("mf.rank: must be positive");
  if (params.epochs <= 0) violations.push_back("mf.epochs: must be positive");
  if (!(params.lr > 0.0)) violations.push_back("mf.lr: must be positive");
  if (!(params.reg >= 0.0)) violations.push_back("mf.reg: must be >= 0");
  if (!violations.empty()) throw ConfigError(std::move(violations));
  if (m.empty()) throw DataError("train_mf: empty co-occurrence matrix");

  const int rank = params.rank;
  const auto& entries = m.entries();
  std::vector<double> target(entries.size());
  double sum = 0.0;
  for (size_t e = 0; e < entries.size(); ++e) {
    target[e] = std::log1p(static_cast<double>(entries[e].count));
    sum += target[e];
  }

  LatentFactorModel model;
  model.rank = rank;
  model.users = m.users();
  model.items = m.items();
  for (size_t i = 0; i < model.users.size(); ++i) {
    model.user_index[model.users[i]] = static_cast<int32_t>(i);
  }
  for (size_t i = 0; i < model.items.size(); ++i) {
    model.item_index[model.items[i]] = static_cast<int32_t>(i);
  }
  model.global_mean = sum / static_cast<double>(entries.size());

  std::mt19937_64 rng(params.seed);
  const double scale = 0.01 / std::sqrt(static_cast<double>(rank));
  std::uniform_real_distribution<double> init(-scale, scale);
  model.user_vecs.resize(model.users.size() * rank);
  model.item_vecs.resize(model.items.size() * rank);
  for (double& v : model.user_vecs) v = init(rng);
  for (double& v : model.item_vecs) v = init(rng);

  std::vector<size_t> order(entries.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const double lr = params.lr;
  const double reg = params.reg;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t idx : order) {
      const auto& e = entries[idx];
      double* p = model.user_vecs.data() + static_cast<size_t>(e.user) * rank;
      double* q = model.item_vecs.data() + static_cast<size_t>(e.item) * rank;
      double pred = model.global_mean;
      for (int f = 0; f < rank; ++f) pred += p[f] * q[f];
      const double err = target[idx] - pred;
      for (int f = 0; f < rank; ++f) {
        const double pf = p[f];
        p[f] += lr * (err * q[f] - reg * pf);
        q[f] += lr * (err * pf - reg * q[f]);
      }
    }
    double sq = 0.0;
    for (size_t e = 0; e < entries.size(); ++e) {
      const double d =
          target[e] - model.Affinity(entries[e].user, entries[e].item);
      sq += d * d;
    }
    model.train_rmse_history.push_back(
        std::sqrt(sq / static_cast<double>(entries.size())));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Region distances and clustering

RegionDistances ComputeRegionDistances(RegionId a, RegionId b,
                                       const RegionGrid& grid) {
  const double drow = grid.RowOf(a) - grid.RowOf(b);
  const double dcol = grid.ColOf(a) - grid.ColOf(b);
  RegionDistances d;
  d.manhattan_cells = std::abs(drow) + std::abs(dcol);
  d.euclidean_cells = std::sqrt(drow * drow + dcol * dcol);
  d.geo_km = a == b ? 0.0 : HaversineKm(grid.Centroid(a), grid.Centroid(b));
  return d;
}

namespace {

double SquaredDistance(const std::array<double, 3>& a,
                       const std::array<double, 3>& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

double Normalize(double v, double lo, double hi) {
  return hi > lo ? (v - lo) / (hi - lo) : 0.0;
}

}  // namespace

std::array<double, 3> RegionClusterModel::Embed(RegionId region,
                                                const RegionGrid& grid) const {
  const GeoPoint c = grid.Centroid(region);
  auto it = origin_counts.find(region);
  const double logc =
      std::log1p(it == origin_counts.end() ? 0.0 : static_cast<double>(it->second));
  return {Normalize(c.lat, lo[0], hi[0]), Normalize(c.lng, lo[1], hi[1]),
          Normalize(logc, lo[2], hi[2])};
}

int RegionClusterModel::Nearest(const std::array<double, 3>& v) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.size(); ++c) {
    const double d = SquaredDistance(v, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int RegionClusterModel::ClusterOf(RegionId region, const RegionGrid& grid) const {
  auto it = assignment.find(region);
  if (it != assignment.end()) return it->second;
  return Nearest(Embed(region, grid));
}

nlohmann::json RegionClusterModel::ToJson() const {
  nlohmann::json cents = nlohmann::json::array();
  for (const auto& c : centroids) cents.push_back(c);
  nlohmann::json assign = nlohmann::json::array();
  for (const auto& [region, cluster] : assignment) {
    assign.push_back({region, cluster, origin_counts.at(region)});
  }
  return {{"k", k},
          {"centroids", std::move(cents)},
          {"assignment", std::move(assign)},
          {"lo", lo},
          {"hi", hi},
          {"inertia_history", inertia_history}};
}

RegionClusterModel RegionClusterModel::FromJson(const nlohmann::json& j) {
  try {
    RegionClusterModel m;
    m.k = j.at("k").get<int>();
    for (const auto& c : j.at("centroids")) {
      m.centroids.push_back(c.get<std::array<double, 3>>());
    }
    for (const auto& a : j.at("assignment")) {
      const RegionId r = a.at(0).get<RegionId>();
      m.assignment[r] = a.at(1).get<int>();
      m.origin_counts[r] = a.at(2).get<int64_t>();
    }
    m.lo = j.at("lo").get<std::array<double, 3>>();
    m.hi = j.at("hi").get<std::array<double, 3>>();
    m.inertia_history = j.at("inertia_history").get<std::vector<double>>();
    if (m.k <= 0 || static_cast<int>(m.centroids.size()) != m.k) {
      throw DataError("region clusters: centroid count differs from k");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("region clusters: ") + e.what());
  }
}

RegionClusterModel FitRegionClusters(std::span<const LabeledTrip> train,
                                     const RegionGrid& grid,
                                     const KMeansParams& params) {
  std::vector<std::string> violations;
  if (params.k <= 0) violations.push_back("kmeans.k: must be positive");
  if (params.max_iter <= 0) {
    violations.push_back("kmeans.max_iter: must be positive");
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));

  RegionClusterModel model;
  model.k = params.k;
  for (const LabeledTrip& t : train) ++model.origin_counts[t.o_region];
  const size_t n = model.origin_counts.size();
  if (n < static_cast<size_t>(params.k)) {
    throw ConfigError("kmeans.k: " + std::to_string(params.k) +
                      " clusters but only " + std::to_string(n) +
                      " regions have origins in train");
  }

  std::vector<RegionId> regions;
  model.lo = {std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
  model.hi = {-model.lo[0], -model.lo[1], -model.lo[2]};
  for (const auto& [region, count] : model.origin_counts) {
    regions.push_back(region);
    const GeoPoint c = grid.Centroid(region);
    const std::array<double, 3> raw = {c.lat, c.lng,
                                       std::log1p(static_cast<double>(count))};
    for (int d = 0; d < 3; ++d) {
      model.lo[d] = std::min(model.lo[d], raw[d]);
      model.hi[d] = std::max(model.hi[d], raw[d]);
    }
  }
  std::vector<std::array<double, 3>> points;
  points.reserve(n);
  for (RegionId r : regions) points.push_back(model.Embed(r, grid));

  // k-means++ seeding.
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  size_t first = static_cast<size_t>(unit(rng) * n);
  first = std::min(first, n - 1);
  model.centroids.push_back(points[first]);
  chosen[first] = true;
  while (static_cast<int>(model.centroids.size()) < params.k) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(points[i], model.centroids.back()));
      if (!chosen[i]) total += d2[i];
    }
    size_t pick = n;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (size_t i = 0; i < n; ++i) {
        if (chosen[i]) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      // Only duplicates of chosen points remain.
      std::vector<size_t> left;
      for (size_t i = 0; i < n; ++i) {
        if (!chosen[i]) left.push_back(i);
      }
      pick = left[std::min(left.size() - 1,
                           static_cast<size_t>(unit(rng) * left.size()))];
    }
    chosen[pick] = true;
    model.centroids.push_back(points[pick]);
  }

  // Lloyd iterations.
  std::vector<int> assign(n, -1);
  auto assign_all = [&]() {
    bool changed = false;
    double inertia = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const int c = model.Nearest(points[i]);
      if (c != assign[i]) changed = true;
      assign[i] = c;
      inertia += SquaredDistance(points[i], model.centroids[c]);
    }
    model.inertia_history.push_back(inertia);
    return changed;
  };
  assign_all();
  for (int iter = 0; iter < params.max_iter; ++iter) {
    std::vector<std::array<double, 3>> sums(params.k, {0.0, 0.0, 0.0});
    std::vector<int64_t> sizes(params.k, 0);
    for (size_t i = 0; i < n; ++i) {
      for (int d = 0; d < 3; ++d) sums[assign[i]][d] += points[i][d];
      ++sizes[assign[i]];
    }
    for (int c = 0; c < params.k; ++c) {
      if (sizes[c] == 0) continue;  // empty cluster keeps its centroid
      for (int d = 0; d < 3; ++d) {
        model.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
      }
    }
    if (!assign_all()) break;
  }
  for (size_t i = 0; i < n; ++i) model.assignment[regions[i]] = assign[i];
  return model;
}

// ---------------------------------------------------------------------------
// Interaction bundle

void InteractionConfig::Validate() const {
  std::vector<std::string> violations;
  for (const CfSpec& s : pre_specs) {
    if (!s.PreEligible()) {
      violations.push_back("interactions.cf_specs_pre: '" + s.ToString() +
                           "' needs the assigned vehicle");
    }
  }
  auto check_unique = [&](const std::vector<CfSpec>& specs, const char* name) {
    for (size_t i = 0; i < specs.size(); ++i) {
      for (size_t j = i + 1; j < specs.size(); ++j) {
        if (specs[i] == specs[j]) {
          violations.push_back(std::string(name) + ": duplicate '" +
                               specs[i].ToString() + "'");
        }
      }
    }
  };
  check_unique(pre_specs, "interactions.cf_specs_pre");
  check_unique(post_specs, "interactions.cf_specs_post");
  for (const CfSpec& a : pre_specs) {
    for (const CfSpec& b : post_specs) {
      if (a == b) {
        violations.push_back("interactions: '" + a.ToString() +
                             "' listed as both pre and post spec");
      }
    }
  }
  if (mf.rank <= 0) violations.push_back("interactions.mf.rank: must be positive");
  if (mf.epochs <= 0) {
    violations.push_back("interactions.mf.epochs: must be positive");
  }
  if (!(mf.lr > 0.0)) violations.push_back("interactions.mf.lr: must be positive");
  if (!(mf.reg >= 0.0)) violations.push_back("interactions.mf.reg: must be >= 0");
  if (kmeans.k <= 0) {
    violations.push_back("interactions.kmeans.k: must be positive");
  }
  if (kmeans.max_iter <= 0) {
    violations.push_back("interactions.kmeans.max_iter: must be positive");
  }
  if (!violations.empty()) throw ConfigError(std::move(violations));
}

std::string InteractionConfig::Canonical() const {
  std::string out = "interactions|pre";
  for (const CfSpec& s : pre_specs) out += ":" + s.ToString();
  out += "|post";
  for (const CfSpec& s : post_specs) out += ":" + s.ToString();
  out += "|mf:" + std::to_string(mf.rank) + ":" + std::to_string(mf.epochs) +
         ":" + FormatDouble(mf.lr) + ":" + FormatDouble(mf.reg) + ":" +
         std::to_string(mf.seed);
  out += "|kmeans:" + std::to_string(kmeans.k) + ":" +
         std::to_string(kmeans.max_iter) + ":" + std::to_string(kmeans.seed);
  return out;
}

std::string InteractionModels::Fingerprint() const {
  return HexFingerprint(config.Canonical() + "|" + grid_fingerprint);
}

namespace {

std::string OdKey(const LabeledTrip& t) {
  return std::to_string(t.o_region) + "|" + std::to_string(t.d_region);
}

std::string OdrKey(const LabeledTrip& t, const Calendar& calendar) {
  return OdKey(t) + "|" +
         std::to_string(
             static_cast<int>(calendar.SlotOf(t.record.order_time).slot));
}

nlohmann::json CountsToJson(const std::unordered_map<std::string, int64_t>& m) {
  // Sorted so that serialization is deterministic.
  std::map<std::string, int64_t> sorted(m.begin(), m.end());
  return sorted;
}

nlohmann::json SpecsToJson(const std::vector<CfSpec>& specs) {
  nlohmann::json out = nlohmann::json::array();
  for (const CfSpec& s : specs) out.push_back(s.ToString());
  return out;
}

std::vector<CfSpec> SpecsFromJson(const nlohmann::json& j) {
  std::vector<CfSpec> out;
  for (const auto& s : j) out.push_back(CfSpec::Parse(s.get<std::string>()));
  return out;
}

nlohmann::json CfModelsToJson(const std::vector<CfFeatureModel>& models) {
  nlohmann::json out = nlohmann::json::array();
  for (const CfFeatureModel& m : models) {
    out.push_back({{"counts", m.counts.ToJson()}, {"factors", m.factors.ToJson()}});
  }
  return out;
}

std::vector<CfFeatureModel> CfModelsFromJson(const nlohmann::json& j) {
  std::vector<CfFeatureModel> out;
  for (const auto& m : j) {
    out.push_back({CooccurrenceMatrix::FromJson(m.at("counts")),
                   LatentFactorModel::FromJson(m.at("factors"))});
  }
  return out;
}

}  // namespace

nlohmann::json InteractionModels::ToJson() const {
  return {{"config",
           {{"cf_specs_pre", SpecsToJson(config.pre_specs)},
            {"cf_specs_post", SpecsToJson(config.post_specs)},
            {"mf",
             {{"rank", config.mf.rank},
              {"epochs", config.mf.epochs},
              {"lr", config.mf.lr},
              {"reg", config.mf.reg},
              {"seed", config.mf.seed}}},
            {"kmeans",
             {{"k", config.kmeans.k},
              {"max_iter", config.kmeans.max_iter},
              {"seed", config.kmeans.seed}}}}},
          {"grid_fingerprint", grid_fingerprint},
          {"fingerprint", Fingerprint()},
          {"pre_cf", CfModelsToJson(pre_cf)},
          {"post_cf", CfModelsToJson(post_cf)},
          {"od_counts", CountsToJson(od_counts)},
          {"odr_counts", CountsToJson(odr_counts)},
          {"clusters", clusters.ToJson()}};
}

InteractionModels InteractionModels::FromJson(const nlohmann::json& j) {
  try {
    InteractionModels m;
    const auto& c = j.at("config");
    m.config.pre_specs = SpecsFromJson(c.at("cf_specs_pre"));
    m.config.post_specs = SpecsFromJson(c.at("cf_specs_post"));
    m.config.mf.rank = c.at("mf").at("rank").get<int>();
    m.config.mf.epochs = c.at("mf").at("epochs").get<int>();
    m.config.mf.lr = c.at("mf").at("lr").get<double>();
    m.config.mf.reg = c.at("mf").at("reg").get<double>();
    m.config.mf.seed = c.at("mf").at("seed").get<uint64_t>();
    m.config.kmeans.k = c.at("kmeans").at("k").get<int>();
    m.config.kmeans.max_iter = c.at("kmeans").at("max_iter").get<int>();
    m.config.kmeans.seed = c.at("kmeans").at("seed").get<uint64_t>();
    m.grid_fingerprint = j.at("grid_fingerprint").get<std::string>();
    m.pre_cf = CfModelsFromJson(j.at("pre_cf"));
    m.post_cf = CfModelsFromJson(j.at("post_cf"));
    for (const auto& [k, v] : j.at("od_counts").items()) {
      m.od_counts[k] = v.get<int64_t>();
    }
    for (const auto& [k, v] : j.at("odr_counts").items()) {
      m.odr_counts[k] = v.get<int64_t>();
    }
    m.clusters = RegionClusterModel::FromJson(j.at("clusters"));
    if (m.pre_cf.size() != m.config.pre_specs.size() ||
        m.post_cf.size() != m.config.post_specs.size()) {
      throw DataError("interaction models: spec/model count mismatch");
    }
    if (j.at("fingerprint").get<std::string>() != m.Fingerprint()) {
      throw DataError("interaction models: fingerprint mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("interaction models: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("interaction models: ") + e.what());
  }
}

InteractionModels FitInteractions(std::span<const LabeledTrip> train,
                                  const RegionGrid& grid,
                                  const Calendar& calendar,
                                  const InteractionConfig& config) {
  config.Validate();
  if (train.empty()) throw DataError("fit_interactions: empty train set");
  InteractionModels m;
  m.config = config;
  m.grid_fingerprint = grid.Fingerprint();
  auto fit_cf = [&](const CfSpec& spec) {
    CfFeatureModel cf;
    cf.counts = BuildCooccurrence(train, spec, calendar);
    cf.factors = TrainMf(cf.counts, config.mf);
    return cf;
  };
  for (const CfSpec& s : config.pre_specs) m.pre_cf.push_back(fit_cf(s));
  for (const CfSpec& s : config.post_specs) m.post_cf.push_back(fit_cf(s));
  for (const LabeledTrip& t : train) {
    ++m.od_counts[OdKey(t)];
    ++m.odr_counts[OdrKey(t, calendar)];
  }
  m.clusters = FitRegionClusters(train, grid, config.kmeans);
  return m;
}

std::vector<FeatureColumn> InteractionColumns(Task task,
                                              const InteractionConfig& config) {
  using K = ColumnKind;
  using A = Availability;
  std::vector<FeatureColumn> cols;
  for (const CfSpec& s : config.pre_specs) {
    cols.push_back({"cf_" + s.ColumnStem() + "_aff", K::kContinuous, A::kPreOk});
    cols.push_back({"cf_" + s.ColumnStem() + "_logcnt", K::kContinuous, A::kPreOk});
  }
  for (const char* name : {"O_x", "O_y", "O_z", "D_x", "D_y", "D_z",
                           "OD_manhattan", "OD_euclidean", "OD_geo_km",
                           "OD_logfreq", "ODR_logfreq"}) {
    cols.push_back({name, K::kContinuous, A::kPreOk});
  }
  cols.push_back({"O_cluster", K::kOrdinalInt, A::kPreOk});
  cols.push_back({"D_cluster", K::kOrdinalInt, A::kPreOk});
  if (task == Task::kPost) {
    for (const CfSpec& s : config.post_specs) {
      cols.push_back({"cf_" + s.ColumnStem() + "_aff", K::kContinuous,
                      s.PreEligible() ? A::kPreOk : A::kPostOnly});
    }
    for (const char* name : {"V_x", "V_y", "V_z", "OV_manhattan",
                             "OV_euclidean", "OV_geo_km"}) {
      cols.push_back({name, K::kContinuous, A::kPostOnly});
    }
    cols.push_back({"V_cluster", K::kOrdinalInt, A::kPostOnly});
  }
  return cols;
}

void FeaturizeInteractions(const LabeledTrip& trip, Task task,
                           const InteractionModels& models,
                           const RegionGrid& grid, const Calendar& calendar,
                           std::vector<double>& out, bool exclude_self) {
  if (models.grid_fingerprint != grid.Fingerprint()) {
    throw DataError("interaction models were fitted for grid " +
                    models.grid_fingerprint + ", not " + grid.Fingerprint());
  }
  const TripRecord& r = trip.record;
  const int64_t self = exclude_self ? 1 : 0;
  auto log_count = [self](int64_t count) {
    return std::log1p(static_cast<double>(std::max<int64_t>(0, count - self)));
  };
  auto lookup = [](const std::unordered_map<std::string, int64_t>& m,
                   const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? int64_t{0} : it->second;
  };

  // (i) spatiotemporal collaborative filtering
  for (const CfFeatureModel& cf : models.pre_cf) {
    const CfSpec& spec = cf.counts.spec();
    const std::string user = spec.UserKey(trip);
    const std::string item = spec.ItemKey(trip, calendar);
    out.push_back(cf.factors.Affinity(user, item));
    out.push_back(log_count(cf.counts.Count(user, item)));
  }
  // (ii) 3D decomposition
  for (const GeoPoint& p : {r.pickup_point, r.dropoff_point}) {
    const auto xyz = Decompose3d(p);
    out.insert(out.end(), xyz.begin(), xyz.end());
  }
  // (iii) region distances
  const RegionDistances od = ComputeRegionDistances(trip.o_region, trip.d_region, grid);
  out.push_back(od.manhattan_cells);
  out.push_back(od.euclidean_cells);
  out.push_back(od.geo_km);
  // (iv) driver-anonymous route frequency
  out.push_back(log_count(lookup(models.od_counts, OdKey(trip))));
  out.push_back(log_count(lookup(models.odr_counts, OdrKey(trip, calendar))));
  // (v) region clusters
  out.push_back(models.clusters.ClusterOf(trip.o_region, grid));
  out.push_back(models.clusters.ClusterOf(trip.d_region, grid));

  if (task == Task::kPre) return;

  for (const CfFeatureModel& cf : models.post_cf) {
    const CfSpec& spec = cf.counts.spec();
    out.push_back(cf.factors.Affinity(spec.UserKey(trip),
                                      spec.ItemKey(trip, calendar)));
  }
  const auto v = Decompose3d(r.dispatch_point);
  out.insert(out.end(), v.begin(), v.end());
  const RegionDistances ov = ComputeRegionDistances(trip.o_region, trip.v_region, grid);
  out.push_back(ov.manhattan_cells);
  out.push_back(ov.euclidean_cells);
  out.push_back(ov.geo_km);
  out.push_back(models.clusters.ClusterOf(trip.v_region, grid));
}

}  // namespace waittime
