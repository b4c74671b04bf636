/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "binorm/errors.hpp"
#include "binorm/series.hpp"

namespace binorm {
namespace {

SampleStream ramp_stream(Eigen::Index t, Eigen::Index d) {
  SampleStream s;
  s.events.resize(t, d);
  for (Eigen::Index i = 0; i < t; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) s.events(i, j) = static_cast<double>(i * 100 + j);
  }
  return s;
}

Matrix m23() {
  Matrix x(2, 3);
  x << 1, 2, 3, 4, 5, 6;
  return x;
}

TEST(TimeSeriesSample, RejectsNonFiniteAndEmpty) {
  Matrix x = m23();
  x(1, 2) = std::nan("");
  EXPECT_THROW(TimeSeriesSample{x}, ValidationError);
  EXPECT_THROW(TimeSeriesSample{Matrix(0, 3)}, ValidationError);
  EXPECT_NO_THROW(TimeSeriesSample{m23()});
}

TEST(SlidingWindows, ExactFitGivesOneSample) {
  const auto w = sliding_windows(ramp_stream(10, 3), 10, 1);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].features(), 3);
  EXPECT_EQ(w[0].steps(), 10);
}

TEST(SlidingWindows, TwelveEventsGiveThreeWindowsWithLatestEventLast) {
  const auto s = ramp_stream(12, 3);
  const auto w = sliding_windows(s, 10, 1);
  ASSERT_EQ(w.size(), 3u);
  for (Eigen::Index h = 0; h < 10; ++h) {
    for (Eigen::Index d = 0; d < 3; ++d) EXPECT_EQ(w[0].values()(d, h), s.events(h, d));
  }
  EXPECT_EQ(w[2].values()(0, 9), s.events(11, 0));
}

TEST(SlidingWindows, CountMatchesBruteForceEnumeration) {
  // Enumerate every start index instead of using the closed form.
  auto brute = [](Eigen::Index t, Eigen::Index h, Eigen::Index stride) {
    std::size_t n = 0;
    for (Eigen::Index start = 0; start < t; ++start) {
      if (start % stride == 0 && start + h <= t) ++n;
    }
    return n;
  };
  EXPECT_EQ(sliding_windows(ramp_stream(1000, 2), 10, 5).size(), 199u);
  EXPECT_EQ(brute(1000, 10, 5), 199u);
  for (Eigen::Index t = 1; t <= 40; ++t) {
    for (Eigen::Index h = 1; h <= t; h += 3) {
      for (Eigen::Index stride = 1; stride <= 7; ++stride) {
        EXPECT_EQ(sliding_windows(ramp_stream(t, 1), h, stride).size(), brute(t, h, stride))
            << "T=" << t << " H=" << h << " stride=" << stride;
      }
    }
  }
}

TEST(SlidingWindows, Errors) {
  EXPECT_THROW(sliding_windows(ramp_stream(5, 2), 10, 1), ValidationError);
  EXPECT_THROW(sliding_windows(ramp_stream(20, 2), 10, 0), ValidationError);
  auto s = ramp_stream(20, 2);
  s.events(3, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(sliding_windows(s, 10, 1), ValidationError);
}

TEST(SampleStream, TimestampsMustNotDecrease) {
  auto s = ramp_stream(4, 2);
  s.timestamps = std::vector<double>{1, 2, 2, 3};
  EXPECT_NO_THROW(validate_stream(s));
  s.timestamps = std::vector<double>{1, 3, 2, 4};
  EXPECT_THROW(validate_stream(s), ValidationError);
}

TEST(StaticNormalizer, ZscoreStatisticsOfWorkedSample) {
  const std::vector<TimeSeriesSample> train{TimeSeriesSample(m23())};
  const auto n = fit_static(StaticKind::kZScore, train);
  ASSERT_TRUE(n.fitted);
  EXPECT_DOUBLE_EQ(n.first(0), 2.0);
  EXPECT_DOUBLE_EQ(n.first(1), 5.0);
  EXPECT_NEAR(n.second(0), 0.816496580927726, 1e-15);
  EXPECT_NEAR(n.second(1), 0.816496580927726, 1e-15);
}

TEST(StaticNormalizer, MinMaxOfConstantSample) {
  const std::vector<TimeSeriesSample> train{TimeSeriesSample(Matrix::Constant(3, 4, 7.0))};
  const auto n = fit_static(StaticKind::kMinMax, train);
  EXPECT_TRUE((n.first.array() == 7.0).all());
  EXPECT_TRUE((n.second.array() == 7.0).all());
}

TEST(StaticNormalizer, TwoSamplesEqualConcatenatedPass) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1.0, 2.0);
  Matrix a(4, 5);
  Matrix b(4, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a.data()[i] = g(rng);
    b.data()[i] = g(rng);
  }
  const std::vector<TimeSeriesSample> train{TimeSeriesSample(a), TimeSeriesSample(b)};
  const auto n = fit_static(StaticKind::kZScore, train);
  Matrix cat(4, 10);
  cat << a, b;
  for (Eigen::Index d = 0; d < 4; ++d) {
    const double mu = cat.row(d).mean();
    const double sd = std::sqrt((cat.row(d).array() - mu).square().mean());
    EXPECT_NEAR(n.first(d), mu, 1e-12);
    EXPECT_NEAR(n.second(d), sd, 1e-12);
  }
}

TEST(StaticNormalizer, ApplyContracts) {
  const std::vector<TimeSeriesSample> train{TimeSeriesSample(m23())};
  const auto z = fit_static(StaticKind::kZScore, train);
  const Matrix out = apply_static(z, m23());
  for (Eigen::Index d = 0; d < 2; ++d) EXPECT_LT(std::abs(out.row(d).mean()), 1e-12);

  StaticNormalizer mm{StaticKind::kMinMax, Vector::Zero(1), Vector::Constant(1, 10.0), true};
  EXPECT_NEAR(apply_static(mm, Matrix::Constant(1, 1, 5.0))(0, 0), 0.5, 1e-9);

  Matrix constant_row = m23();
  constant_row.row(0).setConstant(4.0);
  const auto zc = fit_static(StaticKind::kZScore, std::vector<TimeSeriesSample>{TimeSeriesSample(constant_row)});
  const Matrix oc = apply_static(zc, constant_row);
  EXPECT_TRUE(oc.allFinite());
  EXPECT_TRUE((oc.row(0).array() == 0.0).all());
}

TEST(StaticNormalizer, NoneIsExactIdentity) {
  StaticNormalizer none;
  none.fitted = true;
  Matrix x = m23() * 1.0000001;
  const Matrix y = apply_static(none, x);
  EXPECT_EQ(std::memcmp(x.data(), y.data(), sizeof(double) * 6), 0);
}

TEST(StaticNormalizer, Errors) {
  StaticNormalizer unfitted{StaticKind::kZScore, Vector::Zero(2), Vector::Ones(2), false};
  EXPECT_THROW(apply_static(unfitted, m23()), ValidationError);
  const auto z = fit_static(StaticKind::kZScore, std::vector<TimeSeriesSample>{TimeSeriesSample(m23())});
  EXPECT_THROW(apply_static(z, Matrix::Ones(3, 3)), ShapeError);
  EXPECT_THROW(fit_static(StaticKind::kZScore, std::vector<TimeSeriesSample>{}), ValidationError);
}

TEST(StaticNormalizerProperty, StandardizesTrainingSetAndIsAffine) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<TimeSeriesSample> train;
  for (int n = 0; n < 20; ++n) {
    Matrix x(3, 6);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 5.0 + 3.0 * g(rng);
    train.emplace_back(x);
  }
  const auto z = fit_static(StaticKind::kZScore, train);
  Matrix all(3, 6 * 20);
  for (int n = 0; n < 20; ++n) all.middleCols(6 * n, 6) = apply_static(z, train[n].values());
  for (Eigen::Index d = 0; d < 3; ++d) {
    const double mu = all.row(d).mean();
    const double sd = std::sqrt((all.row(d).array() - mu).square().mean());
    EXPECT_LT(std::abs(mu), 1e-10);
    EXPECT_NEAR(sd, 1.0, 1e-8);  // ε_s = 1e-8 in the denominator bounds the deviation
  }
  // apply(a x + b) = a apply(x) + apply(b 1) - (a - 1) apply(0) for fixed statistics.
  const Matrix& x = train[0].values();
  const double a = 2.5;
  const double b = -1.25;
  const Matrix lhs = apply_static(z, (a * x.array() + b).matrix());
  const Matrix zero = apply_static(z, Matrix::Zero(3, 6));
  const Matrix rhs = a * (apply_static(z, x) - zero) + apply_static(z, Matrix::Constant(3, 6, b));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

}  // namespace
}  // namespace binorm
