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

#include "rfcnn/ops.hpp"
#include "test_util.hpp"

namespace rfcnn::nn {
namespace {

using testing::dot;
using testing::numeric_grad;
using testing::random_tensor;
using testing::rel_error;

constexpr double kOpTol = 1e-6;

std::span<double> span_of(std::vector<double>& v) { return v; }

struct ConvCase {
  Shape x, w;
  Extent2 stride, pad;
  bool bias;
};

class ConvGrad : public ::testing::TestWithParam<ConvCase> {};

TEST_P(ConvGrad, MatchesFiniteDifferences) {
  const ConvCase c = GetParam();
  Tensor<double> x = random_tensor<double>(c.x, 1);
  ConvParams<double> p{random_tensor<double>(c.w, 2), std::nullopt};
  if (c.bias) p.bias = std::vector<double>(c.w[0], 0.3);
  const Shape ys = conv2d_output_shape(c.x, c.w, c.stride, c.pad);
  const Tensor<double> w = random_tensor<double>(ys, 3);

  auto loss = [&] { return dot(w, conv2d_forward(x, p, c.stride, c.pad)); };
  const ConvGrads<double> g = conv2d_backward(w, x, p, c.stride, c.pad);

  EXPECT_LT(rel_error(g.grad_x.values(), numeric_grad(x.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_w.values(), numeric_grad(p.weights.values(), loss)), kOpTol);
  if (c.bias) {
    EXPECT_LT(rel_error(g.grad_b, numeric_grad(span_of(*p.bias), loss)), kOpTol);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, ConvGrad,
    ::testing::Values(ConvCase{{2, 3, 7, 6}, {4, 3, 3, 3}, {1, 1}, {1, 1}, false},
                      ConvCase{{2, 2, 9, 8}, {3, 2, 5, 5}, {2, 2}, {2, 2}, true},
                      ConvCase{{1, 3, 5, 5}, {2, 3, 1, 1}, {1, 1}, {0, 0}, true},
                      ConvCase{{2, 1, 6, 7}, {2, 1, 3, 1}, {2, 1}, {1, 0}, false}));

TEST(Conv, Im2colMatchesDirectLoopBitwise) {
  for (Extent2 s : {Extent2{1, 1}, Extent2{2, 2}}) {
    const Tensor<float> x = random_tensor<float>({2, 5, 11, 13}, 4);
    ConvParams<float> p{random_tensor<float>({7, 5, 3, 3}, 5), std::vector<float>(7, 0.1f)};
    EXPECT_EQ(conv2d_forward(x, p, s, {1, 1}), conv2d_forward_direct(x, p, s, {1, 1}));
  }
}

TEST(Conv, RejectsChannelMismatchAndEmptyOutput) {
  EXPECT_THROW(conv2d_output_shape({1, 3, 8, 8}, {2, 4, 3, 3}, {1, 1}, {1, 1}), ShapeError);
  EXPECT_THROW(conv2d_output_shape({1, 3, 2, 2}, {2, 3, 5, 5}, {1, 1}, {0, 0}), ShapeError);
}

TEST(Conv, OutputShape) {
  EXPECT_EQ(conv2d_output_shape({1, 2, 256, 431}, {128, 2, 5, 5}, {2, 2}, {2, 2}),
            (Shape{1, 128, 128, 216}));
}

TEST(BatchNorm, TrainGradients) {
  Tensor<double> x = random_tensor<double>({3, 4, 3, 2}, 6);
  BnParams<double> p = BnParams<double>::make(4);
  for (std::size_t c = 0; c < 4; ++c) {
    p.gamma[c] = 0.5 + 0.25 * static_cast<double>(c);
    p.beta[c] = -0.1 * static_cast<double>(c);
  }
  const Tensor<double> w = random_tensor<double>(x.shape(), 7);
  auto loss = [&] {
    BnParams<double> q = p;
    return dot(w, batchnorm_forward(x, q, Mode::Train));
  };
  BnParams<double> q = p;
  BnCache<double> cache;
  batchnorm_forward(x, q, Mode::Train, &cache);
  const BnGrads<double> g = batchnorm_backward(w, cache, p);
  EXPECT_LT(rel_error(g.grad_x.values(), numeric_grad(x.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_gamma, numeric_grad(span_of(p.gamma), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_beta, numeric_grad(span_of(p.beta), loss)), kOpTol);
}

TEST(BatchNorm, EvalGradients) {
  Tensor<double> x = random_tensor<double>({2, 3, 4, 2}, 8);
  BnParams<double> p = BnParams<double>::make(3);
  p.running_mean = {0.1, -0.2, 0.3};
  p.running_var = {0.5, 1.5, 2.0};
  p.gamma = {1.2, 0.7, -0.4};
  const Tensor<double> w = random_tensor<double>(x.shape(), 9);
  auto loss = [&] { return dot(w, batchnorm_forward(x, p, Mode::Eval)); };
  BnCache<double> cache;
  batchnorm_forward(x, p, Mode::Eval, &cache);
  const BnGrads<double> g = batchnorm_backward(w, cache, p);
  EXPECT_LT(rel_error(g.grad_x.values(), numeric_grad(x.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_gamma, numeric_grad(span_of(p.gamma), loss)), kOpTol);
}

TEST(BatchNorm, TrainNormalizesAndTracksRunningStats) {
  const Tensor<double> x = random_tensor<double>({4, 2, 3, 3}, 10, 2.0, 5.0);
  BnParams<double> p = BnParams<double>::make(2);
  const Tensor<double> y = batchnorm_forward(x, p, Mode::Train);
  for (std::size_t c = 0; c < 2; ++c) {
    double s = 0.0, ss = 0.0;
    std::size_t n = 0;
    for (std::size_t b = 0; b < 4; ++b)
      for (std::size_t i = 0; i < 9; ++i) {
        const double v = y.plane(b, c)[i];
        s += v;
        ss += v * v;
        ++n;
      }
    EXPECT_NEAR(s / static_cast<double>(n), 0.0, 1e-12);
    EXPECT_NEAR(ss / static_cast<double>(n), 1.0, 1e-4);
    EXPECT_GT(p.running_mean[c], 0.2);
  }
}

TEST(BatchNorm, TrainNeedsTwoValuesPerChannel) {
  BnParams<double> p = BnParams<double>::make(2);
  EXPECT_THROW(batchnorm_forward(Tensor<double>({1, 2, 1, 1}), p, Mode::Train), std::exception);
}

TEST(Relu, Gradient) {
  Tensor<double> x = random_tensor<double>({2, 3, 4, 4}, 11);
  for (auto& v : x.values()) {
    if (std::abs(v) < 0.05) v = 0.3;  // keep away from the kink
  }
  const Tensor<double> w = random_tensor<double>(x.shape(), 12);
  auto loss = [&] { return dot(w, relu_forward(x)); };
  const Tensor<double> g = relu_backward(w, relu_forward(x));
  EXPECT_LT(rel_error(g.values(), numeric_grad(x.values(), loss)), kOpTol);
}

TEST(MaxPool, GradientAndOddTruncation) {
  // Distinct values keep every window's maximum unique under perturbation.
  Tensor<double> x({2, 2, 5, 7});
  std::mt19937_64 rng(13);
  std::vector<double> vals(x.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = 0.01 * static_cast<double>(i);
  std::shuffle(vals.begin(), vals.end(), rng);
  std::copy(vals.begin(), vals.end(), x.data());
  const PoolResult<double> r = maxpool2x2_forward(x);
  EXPECT_EQ(r.y.shape(), (Shape{2, 2, 2, 3}));
  const Tensor<double> w = random_tensor<double>(r.y.shape(), 14);
  auto loss = [&] { return dot(w, maxpool2x2_forward(x).y); };
  const Tensor<double> g = maxpool2x2_backward(w, r.argmax, x.shape());
  EXPECT_LT(rel_error(g.values(), numeric_grad(x.values(), loss, 1e-5)), kOpTol);
}

TEST(MaxPool, TiesGoToFirstElement) {
  Tensor<double> x({1, 1, 2, 2}, 1.0);
  const PoolResult<double> r = maxpool2x2_forward(x);
  EXPECT_EQ(r.argmax[0], 0u);
}

TEST(AvgPool, Gradient) {
  Tensor<double> x = random_tensor<double>({2, 2, 6, 5}, 15);
  const Tensor<double> w = random_tensor<double>({2, 2, 3, 2}, 16);
  auto loss = [&] { return dot(w, avgpool2x2_forward(x)); };
  const Tensor<double> g = avgpool2x2_backward(w, x.shape());
  EXPECT_LT(rel_error(g.values(), numeric_grad(x.values(), loss)), kOpTol);
}

TEST(GlobalAvgPool, Gradient) {
  Tensor<double> x = random_tensor<double>({3, 4, 3, 5}, 17);
  const Tensor<double> w = random_tensor<double>({3, 4, 1, 1}, 18);
  auto loss = [&] { return dot(w, global_avg_pool_forward(x)); };
  const Tensor<double> g = global_avg_pool_backward(w, x.shape());
  EXPECT_LT(rel_error(g.values(), numeric_grad(x.values(), loss)), kOpTol);
}

TEST(Linear, Gradients) {
  Tensor<double> x = random_tensor<double>({3, 5, 1, 1}, 19);
  Tensor<double> wt = random_tensor<double>({4, 5, 1, 1}, 20);
  std::vector<double> b = {0.1, -0.2, 0.3, 0.0};
  const Tensor<double> w = random_tensor<double>({3, 4, 1, 1}, 21);
  auto loss = [&] { return dot(w, linear_forward(x, wt, b)); };
  const LinearGrads<double> g = linear_backward(w, x, wt);
  EXPECT_LT(rel_error(g.grad_x.values(), numeric_grad(x.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_w.values(), numeric_grad(wt.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(g.grad_b, numeric_grad(span_of(b), loss)), kOpTol);
}

TEST(FreqConcat, ValuesAndGradient) {
  Tensor<double> x = random_tensor<double>({2, 3, 4, 5}, 22);
  const Tensor<double> y = freq_concat(x, FreqMode::Ratio);
  ASSERT_EQ(y.shape(), (Shape{2, 4, 4, 5}));
  for (std::size_t f = 0; f < 4; ++f) EXPECT_DOUBLE_EQ(y(1, 3, f, 2), static_cast<double>(f) / 4.0);
  EXPECT_DOUBLE_EQ(freq_value(0, 5, FreqMode::Normalized), -1.0);
  EXPECT_DOUBLE_EQ(freq_value(4, 5, FreqMode::Normalized), 1.0);
  EXPECT_DOUBLE_EQ(freq_value(0, 1, FreqMode::Normalized), 0.0);

  const Tensor<double> w = random_tensor<double>(y.shape(), 23);
  auto loss = [&] { return dot(w, freq_concat(x, FreqMode::Normalized)); };
  const Tensor<double> g = freq_concat_backward(w);
  EXPECT_LT(rel_error(g.values(), numeric_grad(x.values(), loss)), kOpTol);
}

TEST(ShakeShake, GradientWithMatchingCoefficients) {
  Tensor<double> a = random_tensor<double>({3, 2, 2, 2}, 24);
  Tensor<double> b = random_tensor<double>({3, 2, 2, 2}, 25);
  const std::vector<double> alpha = {0.2, 0.5, 0.9};
  const Tensor<double> w = random_tensor<double>(a.shape(), 26);
  auto loss = [&] { return dot(w, shake_shake_combine(a, b, alpha)); };
  const auto [ga, gb] = shake_shake_backward(w, alpha);
  EXPECT_LT(rel_error(ga.values(), numeric_grad(a.values(), loss)), kOpTol);
  EXPECT_LT(rel_error(gb.values(), numeric_grad(b.values(), loss)), kOpTol);
}

TEST(ShakeShake, EvalIsBranchAverage) {
  const Tensor<double> a = random_tensor<double>({2, 2, 3, 3}, 27);
  const Tensor<double> b = random_tensor<double>({2, 2, 3, 3}, 28);
  std::mt19937_64 rng(1);
  const Tensor<double> y = shake_shake_combine(a, b, Mode::Eval, rng);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_DOUBLE_EQ(y[i], 0.5 * (a[i] + b[i]));
}

TEST(ShakeShake, CoefficientLevels) {
  std::mt19937_64 rng(2);
  const auto per_batch = draw_shake_coefficients<double>(rng, 5, ShakeLevel::PerBatch);
  for (double v : per_batch) EXPECT_EQ(v, per_batch[0]);
  const auto per_sample = draw_shake_coefficients<double>(rng, 5, ShakeLevel::PerSample);
  for (double v : per_sample) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_NE(per_sample[0], per_sample[1]);
}

TEST(Residual, AddAndAccumulate) {
  Tensor<double> a = random_tensor<double>({1, 2, 2, 2}, 29);
  const Tensor<double> b = random_tensor<double>({1, 2, 2, 2}, 30);
  const Tensor<double> s = residual_add(a, b);
  accumulate(a, b);
  EXPECT_EQ(s, a);
  EXPECT_THROW(residual_add(a, Tensor<double>({1, 3, 2, 2})), ShapeError);
}

TEST(Softmax, RowsSumToOne) {
  const Tensor<double> z = random_tensor<double>({4, 6, 1, 1}, 31, -50.0, 50.0);
  const Tensor<double> p = softmax(z);
  for (std::size_t n = 0; n < 4; ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += p(n, k, 0, 0);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace rfcnn::nn
