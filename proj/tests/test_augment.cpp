/*
 * Copyright 2026 The rfcnn Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfcnn/augment.hpp"
#include "test_util.hpp"

namespace rfcnn::aug {
namespace {

TEST(Beta, MomentsMatchAlpha) {
  Rng rng(3);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = sample_beta(0.3, 0.3, rng);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  // Beta(a, a): mean 1/2, variance 1 / (4 (2a + 1)).
  EXPECT_NEAR(mean, 0.5, 0.005);
  EXPECT_NEAR(var, 1.0 / (4.0 * 1.6), 0.003);
}

TEST(Mixup, FixedLambdaIsConvex) {
  const auto a = testing::random_tensor<double>({1, 2, 3, 4}, 1);
  const auto b = testing::random_tensor<double>({1, 2, 3, 4}, 2);
  const std::vector<double> ya = {1, 0, 0}, yb = {0, 0, 1};
  const auto m = mixup_with_lambda(a, ya, b, yb, 0.25);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_DOUBLE_EQ(m.x[i], 0.25 * a[i] + 0.75 * b[i]);
  EXPECT_EQ(m.y, (std::vector<double>{0.25, 0.0, 0.75}));
  EXPECT_DOUBLE_EQ(std::accumulate(m.y.begin(), m.y.end(), 0.0), 1.0);
  EXPECT_THROW(mixup_with_lambda(a, ya, testing::random_tensor<double>({1, 2, 3, 5}, 2), yb, 0.5),
               std::invalid_argument);
}

TEST(Mixup, SameInputIsFixedPoint) {
  Rng rng(5);
  const auto a = testing::random_tensor<float>({1, 1, 4, 4}, 4);
  const std::vector<double> y = {0, 1};
  const auto m = mixup(a, y, a, y, kDefaultMixupAlpha, rng);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(m.x[i], a[i], 1e-6);
  EXPECT_EQ(m.y, y);
}

TEST(Mixup, BatchTargetsStayDistributions) {
  Rng rng(9);
  auto x = testing::random_tensor<float>({6, 1, 2, 2}, 7);
  const auto orig = x;
  std::vector<double> y;
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 3; ++k) y.push_back(k == i % 3 ? 1.0 : 0.0);
  const auto lambdas = mixup_batch(x, y, 3, 0.3, rng);
  ASSERT_EQ(lambdas.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(y[3 * i] + y[3 * i + 1] + y[3 * i + 2], 1.0, 1e-12);
    // Every mixed sample lies between its own value and some other sample.
    const double l = lambdas[i];
    bool found = false;
    for (std::size_t j = 0; j < 6 && !found; ++j) {
      bool ok = true;
      for (std::size_t e = 0; e < 4; ++e) {
        const double want = l * orig[i * 4 + e] + (1.0 - l) * orig[j * 4 + e];
        ok = ok && std::abs(x[i * 4 + e] - want) < 1e-5;
      }
      found = ok;
    }
    EXPECT_TRUE(found) << "sample " << i;
  }
}

TEST(Roll, ShiftsAndWraps) {
  nn::Tensor<float> x({1, 1, 2, 5}, std::vector<float>{0, 1, 2, 3, 4, 10, 11, 12, 13, 14});
  const auto r = roll_time(x, 2);
  EXPECT_EQ(r.storage(), (std::vector<float>{3, 4, 0, 1, 2, 13, 14, 10, 11, 12}));
  EXPECT_EQ(roll_time(x, -3), r);
  EXPECT_EQ(roll_time(x, 5), x);
}

TEST(Roll, RandomShiftIsPerSampleAndPreservesColumns) {
  Rng rng(11);
  const auto x = testing::random_tensor<double>({8, 2, 3, 16}, 13);
  const auto r = roll_time(x, rng);
  for (std::size_t n = 0; n < 8; ++n) {
    long found = -1;
    for (long s = 0; s < 16 && found < 0; ++s) {
      bool ok = true;
      for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t f = 0; f < 3; ++f)
          for (std::size_t t = 0; t < 16; ++t)
            ok = ok && r(n, c, f, (t + static_cast<std::size_t>(s)) % 16) == x(n, c, f, t);
      if (ok) found = s;
    }
    EXPECT_GE(found, 0) << "sample " << n;
  }
}

}  // namespace
}  // namespace rfcnn::aug
