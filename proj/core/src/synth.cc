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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "waittime/error.h"
#include "waittime/geo.h"

namespace waittime {

namespace {

// Relative order intensity per local hour.
constexpr std::array<double, 24> kWeekdayDemand = {
    0.3, 0.2, 0.15, 0.1, 0.1, 0.2, 0.5, 1.2, 1.8, 1.4, 0.9, 0.9,
    1.0, 0.9, 0.9, 1.0, 1.2, 1.6, 1.9, 1.5, 1.1, 0.9, 0.7, 0.5};
constexpr std::array<double, 24> kWeekendDemand = {
    0.5, 0.4, 0.3, 0.2, 0.1, 0.15, 0.3, 0.5, 0.7, 0.9, 1.1, 1.2,
    1.2, 1.1, 1.1, 1.1, 1.1, 1.2, 1.3, 1.2, 1.1, 1.0, 0.9, 0.7};
// Fraction of the driver fleet on the road per local hour.
constexpr std::array<double, 24> kSupply = {
    0.5, 0.4, 0.35, 0.3, 0.3, 0.4, 0.7, 0.9, 1.0, 1.0, 1.0, 1.0,
    1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.9, 0.8, 0.7, 0.6};

// Hourly weather chain: sunny, cloudy, light rain, heavy rain, typhoon.
constexpr std::array<std::array<double, 5>, 5> kWeatherTransition = {{
    {0.85, 0.12, 0.03, 0.00, 0.00},
    {0.15, 0.70, 0.13, 0.02, 0.00},
    {0.05, 0.20, 0.65, 0.09, 0.01},
    {0.00, 0.05, 0.25, 0.65, 0.05},
    {0.00, 0.00, 0.10, 0.20, 0.70},
}};
constexpr std::array<double, 5> kWeatherSeverity = {0.0, 0.2, 0.6, 1.0, 1.6};

constexpr double kRoadFactor = 1.3;
constexpr double kPickShape = 3.0;
constexpr double kKmPerDegree = kEarthRadiusKm * kDegToRad;

double CellDistance(const RegionGrid& grid, RegionId a, int row, int col) {
  const double dr = grid.RowOf(a) - row;
  const double dc = grid.ColOf(a) - col;
  return std::sqrt(dr * dr + dc * dc);
}

// A smooth random field over the grid plus per-cell jitter, squashed into
// (-1, 1) so most regions sit near the extremes.
std::vector<double> LatentField(const RegionGrid& grid, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> row(0, grid.rows() - 1);
  std::uniform_int_distribution<int> col(0, grid.cols() - 1);
  std::normal_distribution<double> jitter(0.0, 1.0);
  struct Bump {
    int row;
    int col;
    double sign;
  };
  std::vector<Bump> bumps;
  for (int k = 0; k < 4; ++k) {
    bumps.push_back({row(rng), col(rng), k % 2 == 0 ? 1.0 : -1.0});
  }
  const double width = std::max(2.0, std::min(grid.rows(), grid.cols()) / 4.0);
  std::vector<double> field(grid.region_count());
  double sum_sq = 0.0;
  for (RegionId r = 0; r < grid.region_count(); ++r) {
    double v = 0.3 * jitter(rng);
    for (const Bump& b : bumps) {
      const double d = CellDistance(grid, r, b.row, b.col);
      v += b.sign * std::exp(-d * d / (2.0 * width * width));
    }
    field[r] = v;
    sum_sq += v * v;
  }
  const double rms = std::sqrt(sum_sq / grid.region_count());
  if (rms > 0.0) {
    for (double& v : field) v = std::tanh(2.0 * v / rms);
  }
  return field;
}

GeoPoint UniformInCell(const RegionGrid& grid, RegionId r, std::mt19937_64& rng) {
  const BoundingBox b = grid.CellBounds(r);
  std::uniform_real_distribution<double> lat(b.min_lat, b.max_lat);
  std::uniform_real_distribution<double> lng(b.min_lng, b.max_lng);
  return {lat(rng), lng(rng)};
}

bool IsRush(Slot s) { return s == Slot::kMorningRush || s == Slot::kEveningRush; }

}  // namespace

void SynthConfig::Validate(const RegionGrid& grid) const {
  std::vector<std::string> v;
  if (n_trips <= 0) v.push_back("synth.n_trips: must be positive");
  if (weeks <= 0) v.push_back("synth.weeks: must be positive");
  if (!std::isfinite(base_wait_s)) v.push_back("synth.base_wait_s: must be finite");
  const std::pair<const char*, double> named[] = {
      {"w_pick", weights.w_pick},
      {"w_rush", weights.w_rush},
      {"w_weather", weights.w_weather},
      {"w_demand", weights.w_demand},
      {"w_od_affinity", weights.w_od_affinity},
      {"noise_std", weights.noise_std}};
  for (const auto& [name, value] : named) {
    if (!std::isfinite(value)) {
      v.push_back(std::string("synth.weights.") + name + ": must be finite");
    }
  }
  if (!(weights.noise_std >= 0.0)) {
    v.push_back("synth.weights.noise_std: must be >= 0");
  }
  for (const auto& [region, intensity] : hotspots) {
    if (!grid.IsValidRegion(region)) {
      v.push_back("synth.hotspots: region " + std::to_string(region) +
                  " not on the grid");
    }
    if (!(intensity >= 0.0) || !std::isfinite(intensity)) {
      v.push_back("synth.hotspots: intensity must be finite and >= 0");
    }
  }
  if (n_drivers < 0) v.push_back("synth.n_drivers: must be >= 0");
  if (!std::isfinite(od_choice_strength)) {
    v.push_back("synth.od_choice_strength: must be finite");
  }
  if (!(supply_floor > 0.0)) v.push_back("synth.supply_floor: must be positive");
  if (!v.empty()) throw ConfigError(std::move(v));
}

SynthOutput GenerateTrips(const SynthConfig& cfg, const RegionGrid& grid,
                          const Calendar& calendar) {
  cfg.Validate(grid);
  std::mt19937_64 rng(cfg.seed);
  const int regions = grid.region_count();

  // Spatial structure: demand hotspots, driver density and the two latent
  // fields whose product is the planted OD score.
  std::vector<double> demand_w(regions, 0.2);
  std::vector<double> supply_w(regions, 0.3);
  for (RegionId r = 0; r < regions; ++r) {
    for (const auto& [h, intensity] : cfg.hotspots) {
      const double d = CellDistance(grid, r, grid.RowOf(h), grid.ColOf(h));
      demand_w[r] += intensity * std::exp(-d * d / (2.0 * 2.0 * 2.0));
      supply_w[r] += 0.6 * intensity * std::exp(-d * d / (2.0 * 3.0 * 3.0));
    }
  }
  double mean_demand = 0.0;
  double mean_supply = 0.0;
  for (RegionId r = 0; r < regions; ++r) {
    mean_demand += demand_w[r] / regions;
    mean_supply += supply_w[r] / regions;
  }
  const std::vector<double> origin_latent = LatentField(grid, rng);
  const std::vector<double> dest_latent = LatentField(grid, rng);

  // Weather per simulated hour.
  const int hours = cfg.weeks * 168;
  std::vector<int> weather(hours);
  {
    int state = 0;
    for (int h = 0; h < hours; ++h) {
      std::discrete_distribution<int> next(kWeatherTransition[state].begin(),
                                           kWeatherTransition[state].end());
      state = next(rng);
      weather[h] = state;
    }
  }

  // Order times: hour drawn from the demand profile, second uniform.
  std::vector<double> hour_w(hours);
  for (int h = 0; h < hours; ++h) {
    const UnixSeconds t = cfg.start_time + int64_t{h} * 3600;
    const bool weekend = calendar.SlotOf(t).is_weekend;
    const int local_hour = calendar.LocalHour(t);
    hour_w[h] = weekend ? kWeekendDemand[local_hour] : kWeekdayDemand[local_hour];
  }
  std::discrete_distribution<int> pick_hour(hour_w.begin(), hour_w.end());
  std::uniform_int_distribution<int> second(0, 3599);
  std::vector<UnixSeconds> order_times(cfg.n_trips);
  for (auto& t : order_times) {
    t = cfg.start_time + int64_t{pick_hour(rng)} * 3600 + second(rng);
  }
  std::sort(order_times.begin(), order_times.end());

  // Driver pool homed proportionally to supply.
  const int n_drivers =
      cfg.n_drivers > 0 ? cfg.n_drivers
                        : static_cast<int>(std::max<int64_t>(20, cfg.n_trips / 25));
  std::discrete_distribution<int> home_of(supply_w.begin(), supply_w.end());
  std::vector<std::vector<int>> drivers_by_home(regions);
  for (int d = 0; d < n_drivers; ++d) drivers_by_home[home_of(rng)].push_back(d);

  std::discrete_distribution<int> origin_of(demand_w.begin(), demand_w.end());
  std::vector<std::discrete_distribution<int>> dest_of(regions);
  std::vector<bool> dest_ready(regions, false);
  auto destination = [&](RegionId o) {
    if (!dest_ready[o]) {
      std::vector<double> w(regions);
      const GeoPoint oc = grid.Centroid(o);
      for (RegionId d = 0; d < regions; ++d) {
        const double km = HaversineKm(oc, grid.Centroid(d));
        w[d] = std::sqrt(demand_w[d]) * std::exp(-km / 6.0) *
               std::exp(cfg.od_choice_strength * origin_latent[o] * dest_latent[d]);
      }
      dest_of[o] = std::discrete_distribution<int>(w.begin(), w.end());
      dest_ready[o] = true;
    }
    return dest_of[o](rng);
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> any_driver(0, n_drivers - 1);
  const SynthWeights& w = cfg.weights;

  SynthOutput out;
  out.trips.reserve(cfg.n_trips);
  out.truth.reserve(cfg.n_trips);
  for (int64_t i = 0; i < cfg.n_trips; ++i) {
    TripRecord r;
    char id[32];
    std::snprintf(id, sizeof(id), "T%07lld", static_cast<long long>(i + 1));
    r.order_id = id;
    r.order_time = order_times[i];

    const RegionId o_planned = origin_of(rng);
    const RegionId d_planned = destination(o_planned);
    r.pickup_point = UniformInCell(grid, o_planned, rng);
    r.dropoff_point = UniformInCell(grid, d_planned, rng);
    const RegionId o = grid.RegionOf(r.pickup_point);
    const RegionId d = grid.RegionOf(r.dropoff_point);

    const int hour_idx = static_cast<int>((r.order_time - cfg.start_time) / 3600);
    const int local_hour = calendar.LocalHour(r.order_time);
    const TimeSlot slot = calendar.SlotOf(r.order_time);
    const double demand_profile =
        slot.is_weekend ? kWeekendDemand[local_hour] : kWeekdayDemand[local_hour];
    const double demand_rate = demand_w[o] / mean_demand * demand_profile;
    const double supply_rate = supply_w[o] / mean_supply * kSupply[local_hour];
    const double deficit =
        std::max(0.0, demand_rate - supply_rate) / cfg.supply_floor;

    // Vehicle position: gamma-distributed distance, uniform bearing, inside
    // the bbox.
    const double pick_mean_km = 0.3 + 0.6 / std::max(0.3, supply_rate);
    std::gamma_distribution<double> pick_km(kPickShape, pick_mean_km / kPickShape);
    r.dispatch_point = r.pickup_point;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double km = pick_km(rng);
      const double bearing = 2.0 * kPi * unit(rng);
      const GeoPoint cand = {
          r.pickup_point.lat + km / kKmPerDegree * std::cos(bearing),
          r.pickup_point.lng + km / (kKmPerDegree * std::cos(r.pickup_point.lat * kDegToRad)) *
                                   std::sin(bearing)};
      if (grid.Contains(cand)) {
        r.dispatch_point = cand;
        break;
      }
    }
    const RegionId v = grid.RegionOf(r.dispatch_point);
    r.pick_distance_m =
        std::round(HaversineKm(r.dispatch_point, r.pickup_point) * 1000.0 * kRoadFactor * 10.0) / 10.0;
    const double trip_km = HaversineKm(r.pickup_point, r.dropoff_point) * kRoadFactor;
    r.trip_distance_m = std::round(trip_km * 1000.0 * 10.0) / 10.0;

    const int wx = weather[std::clamp(hour_idx, 0, hours - 1)];
    r.weather_code = wx;
    const auto& home = drivers_by_home[v];
    const int driver = home.empty()
                           ? any_driver(rng)
                           : home[std::uniform_int_distribution<size_t>(0, home.size() - 1)(rng)];
    std::snprintf(id, sizeof(id), "D%05d", driver);
    r.driver_id = id;

    SynthTruth t;
    t.order_id = r.order_id;
    t.base = cfg.base_wait_s;
    t.pick = w.w_pick * r.pick_distance_m / 1000.0;
    t.rush = IsRush(slot.slot) ? w.w_rush : 0.0;
    t.weather = w.w_weather * kWeatherSeverity[wx];
    t.demand = w.w_demand * deficit;
    t.od_affinity = w.w_od_affinity * origin_latent[o] * dest_latent[d];
    t.noise = w.noise_std * noise(rng);
    const double total =
        t.base + t.pick + t.rush + t.weather + t.demand + t.od_affinity + t.noise;
    t.wt_s = std::llround(std::max(30.0, total));

    r.pickup_time = r.order_time + t.wt_s;
    const double speed_kmh = IsRush(slot.slot)                ? 15.0
                             : slot.slot == Slot::kLateNight ? 35.0
                                                              : 24.0;
    r.dropoff_time = r.pickup_time + 30 + std::llround(trip_km / speed_kmh * 3600.0);
    out.trips.push_back(std::move(r));
    out.truth.push_back(std::move(t));
  }
  return out;
}

nlohmann::json TruthToJson(const SynthOutput& out) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SynthTruth& t : out.truth) {
    rows.push_back({{"order_id", t.order_id},
                    {"base", t.base},
                    {"pick", t.pick},
                    {"rush", t.rush},
                    {"weather", t.weather},
                    {"demand", t.demand},
                    {"od_affinity", t.od_affinity},
                    {"noise", t.noise},
                    {"wt_s", t.wt_s}});
  }
  return {{"n_trips", out.truth.size()}, {"trips", std::move(rows)}};
}

}  // namespace waittime
