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

#include "waittime/featurizer.h"

#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {

Featurizer Featurizer::Fit(std::span<const LabeledTrip> train, RegionGrid grid,
                           Calendar calendar, int ds_granularity_min,
                           std::optional<InteractionConfig> interactions) {
  Featurizer f(std::move(grid), std::move(calendar));
  f.ds_index_ = BuildDsIndex(train, ds_granularity_min, f.calendar_);
  const std::vector<DemandSupply> loo =
      LeaveOneOutDemandSupply(train, f.ds_index_, f.calendar_);
  for (size_t i = 0; i < train.size(); ++i) {
    f.fit_rows_.emplace(train[i].record.order_id, loo[i]);
  }
  if (interactions) {
    f.interactions_ =
        FitInteractions(train, f.grid_, f.calendar_, *interactions);
  }
  return f;
}

FeatureSchema Featurizer::Schema(Task task, bool with_interactions) const {
  FeatureSchema schema = BaseSchema(task);
  if (!with_interactions) return schema;
  if (!interactions_) throw DataError("featurizer: interactions not fitted");
  const auto cols = InteractionColumns(task, interactions_->config);
  return schema.Extended(cols);
}

FeatureMatrix Featurizer::Featurize(std::span<const LabeledTrip> trips,
                                    Task task, bool with_interactions) const {
  return Build(trips, task, with_interactions, false);
}

FeatureMatrix Featurizer::FeaturizeFitRows(std::span<const LabeledTrip> trips,
                                           Task task,
                                           bool with_interactions) const {
  return Build(trips, task, with_interactions, true);
}

FeatureMatrix Featurizer::Build(std::span<const LabeledTrip> trips, Task task,
                                bool with_interactions, bool fit_rows) const {
  FeatureMatrix fm;
  fm.schema = Schema(task, with_interactions);
  fm.values.reserve(trips.size() * fm.schema.size());
  fm.labels.reserve(trips.size());
  fm.row_ids.reserve(trips.size());
  for (const LabeledTrip& t : trips) {
    const size_t before = fm.values.size();
    if (fit_rows) {
      auto it = fit_rows_.find(t.record.order_id);
      if (it == fit_rows_.end()) {
        throw DataError("featurizer: trip " + t.record.order_id +
                        " was not part of the fitted train set");
      }
      FeaturizeBase(t, task, it->second, calendar_, fm.values);
    } else {
      FeaturizeBase(t, task, ds_index_, calendar_, fm.values);
    }
    if (with_interactions) {
      FeaturizeInteractions(t, task, *interactions_, grid_, calendar_,
                            fm.values, fit_rows);
    }
    if (fm.values.size() - before != fm.schema.size()) {
      throw DataError("featurizer: row width differs from schema");
    }
    fm.labels.push_back(static_cast<double>(t.wt_act_s));
    fm.row_ids.push_back(t.record.order_id);
  }
  fm.Validate();
  return fm;
}

void Featurizer::Save(const std::filesystem::path& dir) const {
  WriteFileAtomic(dir / "ds_index.json", ds_index_.ToJson().dump() + "\n");
  if (interactions_) {
    WriteFileAtomic(dir / "interactions.json",
                    interactions_->ToJson().dump() + "\n");
  }
}

Featurizer Featurizer::Load(const std::filesystem::path& dir, RegionGrid grid,
                            Calendar calendar) {
  Featurizer f(std::move(grid), std::move(calendar));
  auto parse = [](const std::filesystem::path& p) {
    nlohmann::json j = nlohmann::json::parse(ReadFile(p), nullptr, false);
    if (j.is_discarded()) throw DataError("malformed JSON in " + p.string());
    return j;
  };
  f.ds_index_ = DemandSupplyIndex::FromJson(parse(dir / "ds_index.json"));
  if (std::filesystem::exists(dir / "interactions.json")) {
    f.interactions_ = InteractionModels::FromJson(parse(dir / "interactions.json"));
    if (f.interactions_->grid_fingerprint != f.grid_.Fingerprint()) {
      throw DataError("interaction models were fitted for a different grid");
    }
  }
  return f;
}

}  // namespace waittime
