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

#include "waittime/evaluation.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {

namespace {

void CheckPair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.empty()) throw DataError("metrics: empty input");
  if (actual.size() != predicted.size()) {
    throw DataError("metrics: " + std::to_string(actual.size()) +
                    " actual values vs " + std::to_string(predicted.size()) +
                    " predictions");
  }
  for (size_t i = 0; i < actual.size(); ++i) {
    if (!std::isfinite(actual[i]) || !std::isfinite(predicted[i])) {
      throw DataError("metrics: non-finite value at row " + std::to_string(i));
    }
  }
}

}  // namespace

double Mae(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double sum = 0.0;
  for (size_t i = 0; i < actual.size(); ++i) {
    sum += std::abs(actual[i] - predicted[i]);
  }
  return sum / static_cast<double>(actual.size());
}

double Rmse(std::span<const double> actual, std::span<const double> predicted) {
  CheckPair(actual, predicted);
  double sum = 0.0;
  for (size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

std::vector<std::pair<double, double>> ErrorCdf(
    std::span<const double> actual, std::span<const double> predicted,
    std::span<const double> thresholds) {
  CheckPair(actual, predicted);
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw DataError("error_cdf: thresholds must be ascending");
  }
  std::vector<double> errors(actual.size());
  for (size_t i = 0; i < actual.size(); ++i) {
    errors[i] = std::abs(actual[i] - predicted[i]);
  }
  std::sort(errors.begin(), errors.end());
  std::vector<std::pair<double, double>> out;
  for (double t : thresholds) {
    const auto within = std::upper_bound(errors.begin(), errors.end(), t) - errors.begin();
    out.emplace_back(t, static_cast<double>(within) / static_cast<double>(errors.size()));
  }
  return out;
}

double LinearModel::PredictRow(std::span<const double> row) const {
  double y = intercept;
  for (size_t j = 0; j < coefficients.size(); ++j) y += coefficients[j] * row[j];
  return y;
}

std::vector<double> LinearModel::Predict(const FeatureMatrix& fm) const {
  if (fm.schema.Fingerprint() != schema_fingerprint) {
    throw DataError("linear model: feature schema fingerprint mismatch");
  }
  std::vector<double> out(fm.rows());
  for (size_t i = 0; i < fm.rows(); ++i) out[i] = PredictRow(fm.Row(i));
  return out;
}

LinearModel FitLinearBaseline(const FeatureMatrix& fm, double ridge) {
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) {
    throw ConfigError("eval.ridge: must be finite and >= 0");
  }
  fm.Validate();
  const Eigen::Index n = static_cast<Eigen::Index>(fm.rows());
  const Eigen::Index d = static_cast<Eigen::Index>(fm.cols());
  if (n == 0) throw DataError("linear baseline: empty feature matrix");

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMajor> x(fm.values.data(), n, d);
  const Eigen::Map<const Eigen::VectorXd> y(fm.labels.data(), n);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel model;
  model.ridge = ridge;
  model.schema_fingerprint = fm.schema.Fingerprint();
  std::vector<std::string> constant;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (xc.col(j).cwiseAbs().maxCoeff() == 0.0) {
      constant.push_back(fm.schema.columns()[j].name);
      model.warnings.push_back("linear baseline: constant feature column " +
                               fm.schema.columns()[j].name);
    }
  }

  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += ridge;
  const Eigen::VectorXd rhs = xc.transpose() * yc;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  if (d > 0) {
    // Jacobi scaling makes the pivot test independent of column units.
    const Eigen::VectorXd diag = gram.diagonal();
    bool singular = diag.minCoeff() <= 0.0;
    if (!singular) {
      const Eigen::VectorXd s = diag.cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd scaled = s.asDiagonal() * gram * s.asDiagonal();
      const Eigen::LDLT<Eigen::MatrixXd> ldlt(scaled);
      singular = ldlt.info() != Eigen::Success ||
                 ldlt.vectorD().minCoeff() <= 1e-12 * static_cast<double>(d);
      if (!singular) {
        w = s.asDiagonal() * ldlt.solve(s.asDiagonal() * rhs);
      }
    }
    if (singular) {
      std::string msg = "linear baseline: singular normal equations (ridge=" +
                        FormatDouble(ridge) + ")";
      if (!constant.empty()) {
        msg += "; constant columns:";
        for (const auto& c : constant) msg += " " + c;
      } else {
        msg += "; columns are collinear";
      }
      throw DataError(msg);
    }
  }
  model.coefficients.assign(w.data(), w.data() + d);
  model.intercept = y_mean - x_mean.dot(w);
  return model;
}

nlohmann::json EvalReport::ToJson() const {
  nlohmann::json cdf = nlohmann::json::array();
  for (const auto& [t, f] : error_cdf) {
    cdf.push_back({{"threshold_s", t}, {"fraction", f}});
  }
  nlohmann::json imp = nlohmann::json::array();
  for (const auto& [name, value] : importance) {
    imp.push_back({{"feature", name}, {"importance", value}});
  }
  return {{"task", TaskName(task)},
          {"model_name", model_name},
          {"mae_s", mae_s},
          {"rmse_s", rmse_s},
          {"n_test", n_test},
          {"frac_under_120s", frac_under_120s},
          {"error_cdf", std::move(cdf)},
          {"importance", std::move(imp)}};
}

EvalReport MakeReport(Task task, std::string model_name,
                      std::span<const double> actual,
                      std::span<const double> predicted,
                      std::span<const double> cdf_thresholds,
                      std::vector<std::pair<std::string, double>> importance) {
  EvalReport r;
  r.task = task;
  r.model_name = std::move(model_name);
  r.mae_s = Mae(actual, predicted);
  r.rmse_s = Rmse(actual, predicted);
  // Power-mean inequality; a violation means the metrics are broken.
  if (!(r.mae_s >= 0.0 && r.mae_s <= r.rmse_s * (1.0 + 1e-12))) {
    throw std::logic_error("eval report: mae exceeds rmse");
  }
  r.error_cdf = ErrorCdf(actual, predicted, cdf_thresholds);
  const double t120[] = {120.0};
  r.frac_under_120s = ErrorCdf(actual, predicted, t120).front().second;
  r.importance = std::move(importance);
  r.n_test = actual.size();
  return r;
}

std::string SummaryCsv(std::span<const EvalReport> reports) {
  std::string out = "model,task,mae_s,rmse_s,n_test,frac_under_120s\n";
  for (const EvalReport& r : reports) {
    out += CsvField(r.model_name) + "," + std::string(TaskName(r.task)) + "," +
           FormatDouble(r.mae_s) + "," + FormatDouble(r.rmse_s) + "," +
           std::to_string(r.n_test) + "," + FormatDouble(r.frac_under_120s) + "\n";
  }
  return out;
}

}  // namespace waittime
