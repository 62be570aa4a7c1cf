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

#include "waittime/config.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "waittime/error.h"
#include "waittime/feature_base.h"
#include "waittime/util.h"

namespace waittime {

namespace {

// Walks one JSON object, recording unknown keys and type errors instead of
// stopping at the first one.
class Section {
 public:
  Section(const nlohmann::json* obj, std::string path,
          std::vector<std::string>& violations)
      : obj_(obj), path_(std::move(path)), violations_(violations) {
    if (obj_ != nullptr && !obj_->is_object()) {
      violations_.push_back(path_ + ": expected an object");
      obj_ = nullptr;
    }
  }
  ~Section() {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!seen_.count(key)) violations_.push_back(Path(key) + ": unknown key");
    }
  }

  template <typename T>
  void Get(const std::string& key, T& out) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) return;
    try {
      T value = obj_->at(key).get<T>();
      out = std::move(value);
    } catch (const nlohmann::json::exception&) {
      violations_.push_back(Path(key) + ": wrong type");
    }
  }

  Section Child(const std::string& key) {
    seen_.insert(key);
    if (obj_ == nullptr || !obj_->contains(key)) {
      return Section(nullptr, Path(key), violations_);
    }
    return Section(&obj_->at(key), Path(key), violations_);
  }

  bool Has(const std::string& key) const {
    return obj_ != nullptr && obj_->contains(key);
  }
  const nlohmann::json& Raw(const std::string& key) {
    seen_.insert(key);
    return obj_->at(key);
  }
  std::string Path(const std::string& key) const { return path_ + "." + key; }

 private:
  const nlohmann::json* obj_;
  std::string path_;
  std::vector<std::string>& violations_;
  std::set<std::string> seen_;
};

void ReadWindow(Section& s, const std::string& key, int& start, int& end,
                std::vector<std::string>& violations) {
  std::vector<int> w = {start, end};
  s.Get(key, w);
  if (w.size() != 2) {
    violations.push_back(s.Path(key) + ": expected [start_hour, end_hour]");
    return;
  }
  start = w[0];
  end = w[1];
}

std::vector<std::string> SpecStrings(const std::vector<CfSpec>& specs) {
  std::vector<std::string> out;
  for (const CfSpec& s : specs) out.push_back(s.ToString());
  return out;
}

}  // namespace

RunConfig RunConfig::FromJson(const nlohmann::json& j) {
  RunConfig c;
  std::vector<std::string> v;
  {
    Section root(&j, "config", v);
    {
      Section g = root.Child("grid");
      g.Get("min_lat", c.grid.bbox.min_lat);
      g.Get("min_lng", c.grid.bbox.min_lng);
      g.Get("max_lat", c.grid.bbox.max_lat);
      g.Get("max_lng", c.grid.bbox.max_lng);
      g.Get("rows", c.grid.rows);
      g.Get("cols", c.grid.cols);
    }
    {
      Section s = root.Child("slots");
      s.Get("tz_offset_hours", c.slots.tz_offset_hours);
      SlotWindows& w = c.slots.windows;
      ReadWindow(s, "morning_rush", w.morning_start, w.morning_end, v);
      ReadWindow(s, "evening_rush", w.evening_start, w.evening_end, v);
      ReadWindow(s, "late_night", w.late_night_start, w.late_night_end, v);
    }
    {
      Section s = root.Child("demand_supply");
      s.Get("granularity_min", c.demand_supply.granularity_min);
    }
    {
      Section s = root.Child("interactions");
      s.Get("enabled", c.interactions.enabled);
      InteractionConfig& ic = c.interactions.config;
      for (const auto& [key, target] :
           {std::pair<std::string, std::vector<CfSpec>*>{"cf_specs_pre", &ic.pre_specs},
            {"cf_specs_post", &ic.post_specs}}) {
        std::vector<std::string> texts = SpecStrings(*target);
        s.Get(key, texts);
        std::vector<CfSpec> parsed;
        for (const std::string& t : texts) {
          try {
            parsed.push_back(CfSpec::Parse(t));
          } catch (const ConfigError& e) {
            v.push_back(s.Path(key) + ": " + e.what());
          }
        }
        *target = std::move(parsed);
      }
      {
        Section m = s.Child("mf");
        m.Get("rank", ic.mf.rank);
        m.Get("epochs", ic.mf.epochs);
        m.Get("lr", ic.mf.lr);
        m.Get("reg", ic.mf.reg);
        m.Get("seed", ic.mf.seed);
      }
      {
        Section k = s.Child("kmeans");
        k.Get("k", ic.kmeans.k);
        k.Get("max_iter", ic.kmeans.max_iter);
        k.Get("seed", ic.kmeans.seed);
      }
    }
    {
      Section s = root.Child("gbt");
      s.Get("num_trees", c.gbt.num_trees);
      s.Get("learning_rate", c.gbt.learning_rate);
      s.Get("max_depth", c.gbt.max_depth);
      s.Get("lambda", c.gbt.lambda);
      s.Get("gamma", c.gbt.gamma);
      s.Get("min_child_weight", c.gbt.min_child_weight);
      s.Get("max_bins", c.gbt.max_bins);
      s.Get("seed", c.gbt.seed);
    }
    {
      Section s = root.Child("eval");
      s.Get("train_frac", c.eval.train_frac);
      s.Get("ridge", c.eval.ridge);
      s.Get("cdf_thresholds_s", c.eval.cdf_thresholds_s);
    }
    {
      Section s = root.Child("synth");
      SynthConfig& sc = c.synth;
      s.Get("n_trips", sc.n_trips);
      s.Get("seed", sc.seed);
      s.Get("weeks", sc.weeks);
      s.Get("start_time", sc.start_time);
      s.Get("base_wait_s", sc.base_wait_s);
      s.Get("n_drivers", sc.n_drivers);
      s.Get("od_choice_strength", sc.od_choice_strength);
      s.Get("supply_floor", sc.supply_floor);
      s.Get("hotspots", sc.hotspots);
      Section w = s.Child("weights");
      w.Get("w_pick", sc.weights.w_pick);
      w.Get("w_rush", sc.weights.w_rush);
      w.Get("w_weather", sc.weights.w_weather);
      w.Get("w_demand", sc.weights.w_demand);
      w.Get("w_od_affinity", sc.weights.w_od_affinity);
      w.Get("noise_std", sc.weights.noise_std);
    }
  }
  try {
    c.Validate();
  } catch (const ConfigError& e) {
    v.insert(v.end(), e.violations().begin(), e.violations().end());
  }
  if (!v.empty()) throw ConfigError(std::move(v));
  return c;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFile(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config: malformed JSON in " + path.string());
  return FromJson(j);
}

void RunConfig::Validate() const {
  std::vector<std::string> v;
  auto collect = [&v](auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      v.insert(v.end(), e.violations().begin(), e.violations().end());
    }
  };
  bool grid_ok = true;
  collect([&] {
    try {
      grid.Make();
    } catch (...) {
      grid_ok = false;
      throw;
    }
  });
  collect([&] { slots.Make(); });
  collect([&] { DemandSupplyIndex idx(demand_supply.granularity_min); });
  collect([&] { interactions.config.Validate(); });
  collect([&] { gbt.Validate(); });
  if (!(eval.train_frac > 0.0 && eval.train_frac < 1.0)) {
    v.push_back("eval.train_frac: must be in (0, 1)");
  }
  if (!(eval.ridge >= 0.0) || !std::isfinite(eval.ridge)) {
    v.push_back("eval.ridge: must be finite and >= 0");
  }
  if (!std::is_sorted(eval.cdf_thresholds_s.begin(), eval.cdf_thresholds_s.end())) {
    v.push_back("eval.cdf_thresholds_s: must be ascending");
  }
  if (grid_ok) collect([&] { synth.Validate(grid.Make()); });
  if (!v.empty()) throw ConfigError(std::move(v));
}

nlohmann::json RunConfig::ToJson() const {
  const SlotWindows& w = slots.windows;
  const InteractionConfig& ic = interactions.config;
  nlohmann::json hotspots = nlohmann::json::array();
  for (const auto& [r, intensity] : synth.hotspots) hotspots.push_back({r, intensity});
  return {
      {"grid",
       {{"min_lat", grid.bbox.min_lat},
        {"min_lng", grid.bbox.min_lng},
        {"max_lat", grid.bbox.max_lat},
        {"max_lng", grid.bbox.max_lng},
        {"rows", grid.rows},
        {"cols", grid.cols}}},
      {"slots",
       {{"tz_offset_hours", slots.tz_offset_hours},
        {"morning_rush", {w.morning_start, w.morning_end}},
        {"evening_rush", {w.evening_start, w.evening_end}},
        {"late_night", {w.late_night_start, w.late_night_end}}}},
      {"demand_supply", {{"granularity_min", demand_supply.granularity_min}}},
      {"interactions",
       {{"enabled", interactions.enabled},
        {"cf_specs_pre", SpecStrings(ic.pre_specs)},
        {"cf_specs_post", SpecStrings(ic.post_specs)},
        {"mf",
         {{"rank", ic.mf.rank},
          {"epochs", ic.mf.epochs},
          {"lr", ic.mf.lr},
          {"reg", ic.mf.reg},
          {"seed", ic.mf.seed}}},
        {"kmeans",
         {{"k", ic.kmeans.k},
          {"max_iter", ic.kmeans.max_iter},
          {"seed", ic.kmeans.seed}}}}},
      {"gbt", gbt.ToJson()},
      {"eval",
       {{"train_frac", eval.train_frac},
        {"ridge", eval.ridge},
        {"cdf_thresholds_s", eval.cdf_thresholds_s}}},
      {"synth",
       {{"n_trips", synth.n_trips},
        {"seed", synth.seed},
        {"weeks", synth.weeks},
        {"start_time", synth.start_time},
        {"base_wait_s", synth.base_wait_s},
        {"n_drivers", synth.n_drivers},
        {"od_choice_strength", synth.od_choice_strength},
        {"supply_floor", synth.supply_floor},
        {"hotspots", std::move(hotspots)},
        {"weights",
         {{"w_pick", synth.weights.w_pick},
          {"w_rush", synth.weights.w_rush},
          {"w_weather", synth.weights.w_weather},
          {"w_demand", synth.weights.w_demand},
          {"w_od_affinity", synth.weights.w_od_affinity},
          {"noise_std", synth.weights.noise_std}}}}},
  };
}

}  // namespace waittime
