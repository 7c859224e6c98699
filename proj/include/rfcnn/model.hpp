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

#ifndef RFCNN_MODEL_HPP_
#define RFCNN_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rfcnn/archspec.hpp"
#include "rfcnn/ops.hpp"
#include "rfcnn/tensor.hpp"

namespace rfcnn::model {

using nn::Mode;
using nn::Tensor;

/// Pooling after blocks 1, 2 and 4. Avg exists for receptive-field probing.
enum class PoolKind { Max, Avg };

/// Shake: random forward alpha, independent random backward beta.
/// Even: alpha = beta = 0.5 in both passes (degenerate regression mode).
enum class ShakeMode { Shake, Even };

struct ModelOptions {
  PoolKind pool = PoolKind::Max;
  ShakeMode shake = ShakeMode::Shake;
};

/// Trainable parameter view. `grad` is overwritten by every backward().
template <class T>
struct ParamRef {
  std::string name;
  std::span<T> value;
  std::span<T> grad;
};

/// Any persistent array (parameters and BN running statistics).
template <class T>
struct StateRef {
  std::string name;
  nn::Shape shape;
  std::span<T> value;
};

/// Executable network built from a NetworkSpec. Train mode is single-writer;
/// Eval-mode forward does not mutate parameters but still records the
/// activations needed for backward(), so one caller at a time per instance.
template <class T>
class Network {
 public:
  static Network init(const arch::NetworkSpec& spec, std::uint64_t seed,
                      ModelOptions options = {});

  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  ~Network();

  const arch::NetworkSpec& spec() const { return spec_; }
  const ModelOptions& options() const { return options_; }
  std::uint64_t seed() const { return seed_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  /// x: [batch, in_channels, F, T] -> logits [batch, num_classes, 1, 1].
  Tensor<T> forward(const Tensor<T>& x);
  /// Gradient of the loss w.r.t. logits -> gradient w.r.t. the input.
  Tensor<T> backward(const Tensor<T>& grad_logits);

  /// Output of the last residual stage, before global pooling.
  Tensor<T> forward_features(const Tensor<T>& x);
  Tensor<T> backward_features(const Tensor<T>& grad_features);

  /// Softmax of the Eval-mode logits.
  Tensor<T> predict_proba(const Tensor<T>& x);

  std::vector<ParamRef<T>> parameters();
  std::vector<StateRef<T>> state();
  std::size_t parameter_count() const;

  /// Reseeds the stream used for shake coefficients.
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  Network() = default;

  arch::NetworkSpec spec_;
  ModelOptions options_;
  std::uint64_t seed_ = 0;
  Mode mode_ = Mode::Train;
  std::mt19937_64 rng_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace rfcnn::model

#endif  // RFCNN_MODEL_HPP_
