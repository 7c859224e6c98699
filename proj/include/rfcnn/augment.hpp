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

#ifndef RFCNN_AUGMENT_HPP_
#define RFCNN_AUGMENT_HPP_

#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfcnn/tensor.hpp"

namespace rfcnn::aug {

using Rng = std::mt19937_64;

inline constexpr double kDefaultMixupAlpha = 0.3;

/// x mixes two inputs, y their target distributions.
template <class T>
struct MixupSample {
  nn::Tensor<T> x;
  std::vector<double> y;
  double lambda = 1.0;
};

/// Beta(a, b) via two gamma draws.
double sample_beta(double a, double b, Rng& rng);

/// lambda ~ Beta(alpha, alpha).
template <class T>
MixupSample<T> mixup(const nn::Tensor<T>& xa, std::span<const double> ya,
                     const nn::Tensor<T>& xb, std::span<const double> yb,
                     double alpha, Rng& rng);

/// Fixed lambda.
template <class T>
MixupSample<T> mixup_with_lambda(const nn::Tensor<T>& xa, std::span<const double> ya,
                                 const nn::Tensor<T>& xb, std::span<const double> yb,
                                 double lambda);

/// In-place batch mix-up. x is [N, ...], y is N rows of `classes` entries.
/// Sample i is paired with perm(i) of a random permutation and gets its own
/// lambda. Returns the lambdas.
template <class T>
std::vector<double> mixup_batch(nn::Tensor<T>& x, std::vector<double>& y,
                                std::size_t classes, double alpha, Rng& rng);

/// Circular shift along time by shift (mod T), same shift for every sample.
template <class T>
nn::Tensor<T> roll_time(const nn::Tensor<T>& x, long shift);

/// Independent uniform shift in [0, T) per sample.
template <class T>
nn::Tensor<T> roll_time(const nn::Tensor<T>& x, Rng& rng);

}  // namespace rfcnn::aug

#endif  // RFCNN_AUGMENT_HPP_
