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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "waittime/error.h"
#include "waittime/util.h"

namespace waittime {
namespace {

using Vec = std::vector<double>;

TEST(MetricsTest, Examples) {
  EXPECT_EQ(Mae(Vec{110, 190}, Vec{100, 200}), 10.0);
  EXPECT_EQ(Rmse(Vec{110, 190}, Vec{100, 200}), 10.0);
  EXPECT_EQ(Mae(Vec{0, 300}, Vec{100, 100}), 150.0);
  EXPECT_DOUBLE_EQ(Rmse(Vec{0, 300}, Vec{100, 100}), std::sqrt(25000.0));
}

TEST(MetricsTest, ErrorCdfExample) {
  const auto cdf = ErrorCdf(Vec{0, 0, 0}, Vec{30, -150, 400}, Vec{60, 120, 300});
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_EQ(cdf[0].first, 60.0);
  EXPECT_DOUBLE_EQ(cdf[0].second, 1.0 / 3);
  EXPECT_DOUBLE_EQ(cdf[1].second, 1.0 / 3);
  EXPECT_DOUBLE_EQ(cdf[2].second, 2.0 / 3);
}

TEST(MetricsTest, RejectsBadInput) {
  EXPECT_THROW(Mae(Vec{}, Vec{}), DataError);
  EXPECT_THROW(Rmse(Vec{1, 2}, Vec{1}), DataError);
  EXPECT_THROW(Mae(Vec{NAN}, Vec{1}), DataError);
  EXPECT_THROW(ErrorCdf(Vec{1}, Vec{1}, Vec{5, 3}), DataError);
}

TEST(MetricsPropertyTest, RandomVectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d(300, 200);
  for (int trial = 0; trial < 1000; ++trial) {
    const size_t n = 1 + trial % 50;
    Vec a(n), p(n), a2(n), p2(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = d(rng);
      p[i] = d(rng);
      a2[i] = a[i] + 1234.5;
      p2[i] = p[i] + 1234.5;
    }
    const double mae = Mae(a, p), rmse = Rmse(a, p);
    EXPECT_GE(mae, 0.0);
    EXPECT_LE(mae, rmse * (1 + 1e-12));
    EXPECT_NEAR(Mae(a2, p2), mae, 1e-9);
    EXPECT_NEAR(Rmse(a2, p2), rmse, 1e-9);
    EXPECT_EQ(Mae(a, a), 0.0);
    const auto cdf = ErrorCdf(a, p, Vec{30, 60, 120, 300, 600});
    for (size_t k = 1; k < cdf.size(); ++k) EXPECT_LE(cdf[k - 1].second, cdf[k].second);
    for (const auto& [t, f] : cdf) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
    }
  }
}

FeatureMatrix Matrix(size_t d, Vec values, Vec labels) {
  std::vector<FeatureColumn> cols;
  for (size_t f = 0; f < d; ++f) cols.push_back({"x" + std::to_string(f)});
  FeatureMatrix fm;
  fm.schema = FeatureSchema(Task::kPre, cols);
  fm.values = std::move(values);
  fm.labels = std::move(labels);
  return fm;
}

TEST(LinearBaselineTest, RecoversExactLine) {
  Vec x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i * 0.7 - 3);
    y.push_back(3 * x.back() + 5);
  }
  LinearModel m = FitLinearBaseline(Matrix(1, x, y), 0.0);
  ASSERT_EQ(m.coefficients.size(), 1u);
  EXPECT_NEAR(m.coefficients[0], 3.0, 1e-8);
  EXPECT_NEAR(m.intercept, 5.0, 1e-8);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(LinearBaselineTest, ConstantColumn) {
  Vec values, y;
  for (int i = 0; i < 10; ++i) {
    values.insert(values.end(), {static_cast<double>(i), 4.0});
    y.push_back(2.0 * i + 1);
  }
  EXPECT_THROW(FitLinearBaseline(Matrix(2, values, y), 0.0), DataError);
  LinearModel m = FitLinearBaseline(Matrix(2, values, y), 1e-6);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].find("x1"), std::string::npos);
  EXPECT_EQ(m.coefficients[1], 0.0);
  EXPECT_NEAR(m.coefficients[0], 2.0, 1e-6);
}

TEST(LinearBaselineTest, RejectsBadInput) {
  EXPECT_THROW(FitLinearBaseline(Matrix(1, {1, 2}, {1, 2}), -1.0), ConfigError);
  EXPECT_THROW(FitLinearBaseline(Matrix(1, {}, {}), 0.0), DataError);
  LinearModel m = FitLinearBaseline(Matrix(1, {1, 2, 3}, {1, 2, 4}), 0.0);
  FeatureMatrix other = Matrix(1, {1}, {1});
  other.schema = FeatureSchema(Task::kPre, {{"z"}});
  EXPECT_THROW(m.Predict(other), DataError);
}

// Householder QR least squares in long double on [1 | X; 0 | sqrt(ridge) I].
std::vector<long double> QrOracle(const Vec& values, const Vec& y, size_t n, size_t d,
                                  double ridge) {
  const size_t m = n + d, p = d + 1;
  std::vector<std::vector<long double>> a(m, std::vector<long double>(p, 0.0L));
  std::vector<long double> b(m, 0.0L);
  for (size_t i = 0; i < n; ++i) {
    a[i][0] = 1.0L;
    for (size_t j = 0; j < d; ++j) a[i][j + 1] = values[i * d + j];
    b[i] = y[i];
  }
  for (size_t j = 0; j < d; ++j) a[n + j][j + 1] = std::sqrt(static_cast<long double>(ridge));
  for (size_t k = 0; k < p; ++k) {
    long double norm = 0.0L;
    for (size_t i = k; i < m; ++i) norm += a[i][k] * a[i][k];
    norm = std::sqrt(norm);
    const long double alpha = a[k][k] > 0 ? -norm : norm;
    std::vector<long double> v(m, 0.0L);
    v[k] = a[k][k] - alpha;
    for (size_t i = k + 1; i < m; ++i) v[i] = a[i][k];
    long double vv = 0.0L;
    for (size_t i = k; i < m; ++i) vv += v[i] * v[i];
    if (vv == 0.0L) continue;
    for (size_t j = k; j < p; ++j) {
      long double s = 0.0L;
      for (size_t i = k; i < m; ++i) s += v[i] * a[i][j];
      for (size_t i = k; i < m; ++i) a[i][j] -= 2 * s / vv * v[i];
    }
    long double s = 0.0L;
    for (size_t i = k; i < m; ++i) s += v[i] * b[i];
    for (size_t i = k; i < m; ++i) b[i] -= 2 * s / vv * v[i];
  }
  std::vector<long double> beta(p);
  for (size_t k = p; k-- > 0;) {
    long double s = b[k];
    for (size_t j = k + 1; j < p; ++j) s -= a[k][j] * beta[j];
    beta[k] = s / a[k][k];
  }
  return beta;
}

TEST(LinearBaselineTest, MatchesQrOracle) {
  const size_t n = 200, d = 5;
  for (double ridge : {0.0, 2.5}) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec values(n * d), y(n);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < d; ++j) values[i * d + j] = g(rng) * (j + 1) + j;
      y[i] = 10 + values[i * d] - 2 * values[i * d + 3] + g(rng);
    }
    LinearModel m = FitLinearBaseline(Matrix(d, values, y), ridge);
    // Intercept is unpenalized, so center to match the fitted problem.
    Vec centered = values;
    for (size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (size_t i = 0; i < n; ++i) mean += values[i * d + j];
      mean /= n;
      for (size_t i = 0; i < n; ++i) centered[i * d + j] -= mean;
    }
    const auto beta = QrOracle(centered, y, n, d, ridge);
    for (size_t j = 0; j < d; ++j) {
      const double want = static_cast<double>(beta[j + 1]);
      EXPECT_NEAR(m.coefficients[j], want, 1e-6 * std::max(1.0, std::abs(want)));
    }
    const auto pred = m.Predict(Matrix(d, values, y));
    for (size_t i = 0; i < n; ++i) {
      long double want = beta[0];
      for (size_t j = 0; j < d; ++j) want += beta[j + 1] * centered[i * d + j];
      EXPECT_NEAR(pred[i], static_cast<double>(want), 1e-6 * std::max(1.0, std::abs(pred[i])));
    }
  }
}

TEST(ReportTest, JsonAndSummary) {
  EvalReport r = MakeReport(Task::kPost, "FiXGBoost", Vec{100, 200, 300, 400},
                            Vec{110, 150, 500, 400}, Vec{60, 120, 300},
                            {{"pickDistance", 0.7}, {"weather", 0.3}});
  EXPECT_EQ(r.mae_s, 65.0);
  EXPECT_EQ(r.n_test, 4u);
  EXPECT_EQ(r.frac_under_120s, 0.75);
  const auto j = r.ToJson();
  EXPECT_EQ(j["model_name"], "FiXGBoost");
  EXPECT_EQ(j["task"], "post");
  EXPECT_EQ(j["mae_s"], 65.0);
  EXPECT_EQ(j["error_cdf"].size(), 3u);
  EXPECT_EQ(j["importance"][0]["feature"], "pickDistance");
  EvalReport lr = MakeReport(Task::kPre, "LR", Vec{1, 2}, Vec{1, 2}, Vec{60});
  const std::string csv = SummaryCsv(std::vector<EvalReport>{lr, r});
  EXPECT_EQ(csv, "model,task,mae_s,rmse_s,n_test,frac_under_120s\n"
                 "LR,pre,0,0,2,1\n"
                 "FiXGBoost,post,65," + FormatDouble(std::sqrt(10650.0)) + ",4,0.75\n");
}

}  // namespace
}  // namespace waittime
