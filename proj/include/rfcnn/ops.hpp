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

// Differentiable operator set. Every forward has a hand-written backward;
// all templates are instantiated for float and double in ops.cpp.

#ifndef RFCNN_OPS_HPP_
#define RFCNN_OPS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "rfcnn/archspec.hpp"
#include "rfcnn/tensor.hpp"

namespace rfcnn::nn {

enum class Mode { Train, Eval };

using arch::Extent2;
using arch::FreqMode;
using arch::ShakeLevel;

// --- convolution -----------------------------------------------------------

template <class T>
struct ConvParams {
  Tensor<T> weights;               // [out, in, kf, kt]
  std::optional<std::vector<T>> bias;  // [out], absent when BN follows
};

template <class T>
struct ConvGrads {
  Tensor<T> grad_x;  // empty when not requested
  Tensor<T> grad_w;
  std::vector<T> grad_b;
};

Shape conv2d_output_shape(const Shape& x, const Shape& w, Extent2 stride,
                          Extent2 padding);

/// Cross-correlation through an im2col buffer.
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvParams<T>& p,
                         Extent2 stride, Extent2 padding);

/// Plain nested loops. Sums in the same order as conv2d_forward, so the two
/// agree bit for bit.
template <class T>
Tensor<T> conv2d_forward_direct(const Tensor<T>& x, const ConvParams<T>& p,
                                Extent2 stride, Extent2 padding);

template <class T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                             const ConvParams<T>& p, Extent2 stride,
                             Extent2 padding, bool need_grad_x = true);

// --- batch normalization ---------------------------------------------------

template <class T>
struct BnParams {
  std::vector<T> gamma, beta;
  std::vector<T> running_mean, running_var;
  T eps = T(1e-5);
  T momentum = T(0.1);

  static BnParams make(std::size_t channels) {
    BnParams p;
    p.gamma.assign(channels, T(1));
    p.beta.assign(channels, T(0));
    p.running_mean.assign(channels, T(0));
    p.running_var.assign(channels, T(1));
    return p;
  }
  std::size_t channels() const { return gamma.size(); }
};

template <class T>
struct BnCache {
  Mode mode = Mode::Train;
  Tensor<T> x_hat;
  std::vector<T> inv_std;
};

template <class T>
struct BnGrads {
  Tensor<T> grad_x;
  std::vector<T> grad_gamma, grad_beta;
};

/// Train mode normalizes over (batch, freq, time) and updates running stats.
template <class T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BnParams<T>& p, Mode mode,
                            BnCache<T>* cache = nullptr);

template <class T>
BnGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BnCache<T>& cache,
                              const BnParams<T>& p);

// --- elementwise, pooling, head --------------------------------------------

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x);
/// Uses the forward output to gate the gradient.
template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& y);

template <class T>
struct PoolResult {
  Tensor<T> y;
  std::vector<std::uint32_t> argmax;  // flat (f * T + t) index per output
};

/// 2x2 stride-2 max pooling; odd extents are truncated. Ties go to the first
/// element in row-major window order.
template <class T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& x);
template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out,
                              const std::vector<std::uint32_t>& argmax,
                              const Shape& in_shape);

template <class T>
Tensor<T> avgpool2x2_forward(const Tensor<T>& x);
template <class T>
Tensor<T> avgpool2x2_backward(const Tensor<T>& grad_out, const Shape& in_shape);

/// -> [batch, channel, 1, 1]
template <class T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& x);
template <class T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& grad_out,
                                   const Shape& in_shape);

/// x: [n, in, 1, 1], w: [out, in, 1, 1] -> [n, out, 1, 1]
template <class T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const std::vector<T>& b);

template <class T>
struct LinearGrads {
  Tensor<T> grad_x, grad_w;
  std::vector<T> grad_b;
};

template <class T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                               const Tensor<T>& w);

// --- frequency channel -----------------------------------------------------

/// Value of the appended channel at frequency row f of F rows.
/// Ratio: f / F. Normalized: 2f / (F - 1) - 1 (0 when F == 1).
double freq_value(std::size_t f, std::size_t F, FreqMode mode);

template <class T>
Tensor<T> freq_concat(const Tensor<T>& x, FreqMode mode = FreqMode::Ratio);
/// Drops the appended channel's gradient.
template <class T>
Tensor<T> freq_concat_backward(const Tensor<T>& grad_out);

// --- residual combination --------------------------------------------------

/// One coefficient per sample (PerSample) or one repeated (PerBatch).
template <class T>
std::vector<T> draw_shake_coefficients(std::mt19937_64& rng, std::size_t batch,
                                       ShakeLevel level);

/// alpha * a + (1 - alpha) * b with per-sample alpha.
template <class T>
Tensor<T> shake_shake_combine(const Tensor<T>& a, const Tensor<T>& b,
                              const std::vector<T>& alpha);

/// Train: alpha ~ U(0,1) drawn from rng. Eval: 0.5 * (a + b).
template <class T>
Tensor<T> shake_shake_combine(const Tensor<T>& a, const Tensor<T>& b, Mode mode,
                              std::mt19937_64& rng,
                              ShakeLevel level = ShakeLevel::PerSample);

/// Splits grad into (beta * g, (1 - beta) * g).
template <class T>
std::pair<Tensor<T>, Tensor<T>> shake_shake_backward(const Tensor<T>& grad_out,
                                                     const std::vector<T>& beta);

template <class T>
Tensor<T> residual_add(const Tensor<T>& branch, const Tensor<T>& shortcut);

/// In-place a += b.
template <class T>
void accumulate(Tensor<T>& a, const Tensor<T>& b);

/// Row-wise softmax over the channel axis of a [n, k, 1, 1] tensor.
template <class T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace rfcnn::nn

#endif  // RFCNN_OPS_HPP_
