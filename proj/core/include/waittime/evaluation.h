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

#ifndef WAITTIME_EVALUATION_H_
#define WAITTIME_EVALUATION_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "waittime/feature_base.h"

namespace waittime {

// Mean absolute error. Throws DataError on empty or mismatched inputs or a
// non-finite value.
double Mae(std::span<const double> actual, std::span<const double> predicted);
// Root mean squared error; same preconditions as Mae.
double Rmse(std::span<const double> actual, std::span<const double> predicted);

// Fraction of rows with |actual - predicted| <= t for each threshold.
// Thresholds must be ascending.
std::vector<std::pair<double, double>> ErrorCdf(
    std::span<const double> actual, std::span<const double> predicted,
    std::span<const double> thresholds);

// Ridge regression with an unpenalized intercept.
struct LinearModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double ridge = 0.0;
  std::string schema_fingerprint;
  std::vector<std::string> warnings;

  double PredictRow(std::span<const double> row) const;
  // Throws DataError on a schema mismatch.
  std::vector<double> Predict(const FeatureMatrix& fm) const;
};

// Solves (Xc'Xc + ridge I) w = Xc'yc on mean-centered data and recovers the
// intercept from the means. Constant columns produce a warning; a singular
// system throws DataError naming the suspect columns.
LinearModel FitLinearBaseline(const FeatureMatrix& fm, double ridge);

struct EvalReport {
  Task task = Task::kPre;
  std::string model_name;
  double mae_s = 0.0;
  double rmse_s = 0.0;
  std::vector<std::pair<double, double>> error_cdf;
  std::vector<std::pair<std::string, double>> importance;
  size_t n_test = 0;
  double frac_under_120s = 0.0;

  nlohmann::json ToJson() const;
};

// Computes every metric of a report; checks 0 <= mae <= rmse.
EvalReport MakeReport(Task task, std::string model_name,
                      std::span<const double> actual,
                      std::span<const double> predicted,
                      std::span<const double> cdf_thresholds,
                      std::vector<std::pair<std::string, double>> importance = {});

// model,task,mae_s,rmse_s,n_test,frac_under_120s
std::string SummaryCsv(std::span<const EvalReport> reports);

}  // namespace waittime

#endif  // WAITTIME_EVALUATION_H_
