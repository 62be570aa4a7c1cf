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

#include "waittime/experiment.h"

#include <string>
#include <utility>

#include "waittime/error.h"
#include "waittime/featurizer.h"

namespace waittime {

namespace {

// Runs `fn`, re-raising any failure with the stage name prepended.
template <typename Fn>
auto Stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::vector<std::string> v;
    for (const std::string& m : e.violations()) v.push_back(name + ": " + m);
    throw ConfigError(std::move(v));
  } catch (const OutOfBounds& e) {
    throw OutOfBounds(name + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

}  // namespace

ExperimentResult RunExperiment(const RunConfig& config,
                               std::vector<LabeledTrip> trips,
                               const ExperimentOptions& options) {
  Stage("config", [&] { config.Validate(); });
  ExperimentResult result;
  SplitResult split = Stage("split", [&] {
    return ChronoSplit(std::move(trips), config.eval.train_frac);
  });
  result.warnings = split.warnings;

  Featurizer featurizer = Stage("featurize", [&] {
    return Featurizer::Fit(split.train, config.grid.Make(), config.slots.Make(),
                           config.demand_supply.granularity_min,
                           config.interactions.config);
  });
  TrainOptions train_options;
  train_options.num_threads = options.num_threads;
  const std::vector<double>& thresholds = config.eval.cdf_thresholds_s;

  for (Task task : {Task::kPre, Task::kPost}) {
    const std::string tname(TaskName(task));
    FeatureMatrix base_train, base_test, full_train, full_test;
    Stage("featurize/" + tname, [&] {
      base_train = featurizer.FeaturizeFitRows(split.train, task, false);
      base_test = featurizer.Featurize(split.test, task, false);
      full_train = featurizer.FeaturizeFitRows(split.train, task, true);
      full_test = featurizer.Featurize(split.test, task, true);
    });

    Stage(std::string(kModelLinear) + "/" + tname, [&] {
      LinearModel lr = FitLinearBaseline(base_train, config.eval.ridge);
      for (const std::string& w : lr.warnings) {
        result.warnings.push_back(std::string(kModelLinear) + "/" + tname + ": " + w);
      }
      std::vector<double> pred = lr.Predict(base_test);
      result.reports.push_back(
          MakeReport(task, kModelLinear, base_test.labels, pred, thresholds));
    });

    for (const auto& [name, train_fm, test_fm] :
         {std::tuple<const char*, const FeatureMatrix*, const FeatureMatrix*>{
              kModelGbtBase, &base_train, &base_test},
          {kModelFixgb, &full_train, &full_test}}) {
      const std::string key = std::string(name) + "/" + tname;
      Stage(key, [&] {
        GbtModel model = TrainGbt(*train_fm, config.gbt, train_options);
        std::vector<double> pred = PredictGbt(model, *test_fm);
        result.reports.push_back(MakeReport(task, name, test_fm->labels, pred,
                                            thresholds, RankedImportance(model)));
        result.models.emplace(key, std::move(model));
      });
    }
  }
  return result;
}

}  // namespace waittime
