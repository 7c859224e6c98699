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

#ifndef RFCNN_TRAIN_HPP_
#define RFCNN_TRAIN_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcnn/dataset.hpp"
#include "rfcnn/model.hpp"

namespace rfcnn::train {

using nn::Tensor;

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constant, then linear decay, then constant at the floor. Epochs are 1-based.
struct Schedule {
  double lr_start = 1e-4;
  double lr_end = 5e-6;
  int decay_start_epoch = 50;
  int decay_end_epoch = 250;
  int total_epochs = 350;

  /// Breakpoints scaled in proportion to 50/350 and 250/350.
  static Schedule scaled(int total_epochs, double lr_start = 1e-4, double lr_end = 5e-6);

  double lr_at(int epoch) const;
};

template <class T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<T>> m;
  std::vector<std::vector<T>> v;
};

/// Bias-corrected Adam over every parameter. Gradients are checked for
/// finiteness before anything is modified.
template <class T>
void adam_step(std::span<const model::ParamRef<T>> params, AdamState<T>& state, double lr);

template <class T>
struct LossResult {
  double loss = 0.0;
  Tensor<T> grad;  // d(mean loss)/d(logits)
};

/// Mean over the batch of -sum(y * log softmax(z)). logits: [N, K, 1, 1];
/// targets: N rows of K probabilities.
template <class T>
LossResult<T> cross_entropy(const Tensor<T>& logits, std::span<const double> targets);

std::vector<double> one_hot(std::span<const int> labels, int classes);

/// Element-wise mean of equally shaped probability tensors.
template <class T>
Tensor<T> average_predictions(std::span<const Tensor<T>> probs);

template <class T>
std::vector<int> argmax_rows(const Tensor<T>& probs);

struct TrainConfig {
  int epochs = 350;
  Schedule schedule;
  std::size_t batch_size = 32;
  bool mixup = true;
  double mixup_alpha = 0.3;
  bool roll = true;
  std::uint64_t seed = 0;
  /// Snapshots kept for prediction averaging.
  int keep_last = 25;
  /// Also score the training set in Eval mode after every epoch.
  bool eval_train = false;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;       // running, Train mode, against hard labels
  double eval_train_acc = -1.0;  // Eval mode, if requested
  double test_loss = 0.0;
  double test_acc = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  Tensor<float> probs;  // [N, K, 1, 1]
};

EvalResult evaluate(model::Network<float>& net, const data::Dataset& ds,
                    std::size_t batch_size = 32);

struct TrainReport {
  std::vector<EpochRecord> epochs;
  /// Test-set probabilities of the last `keep_last` epochs, oldest first.
  std::vector<Tensor<float>> recent_probs;
  /// Accuracy of the averaged recent predictions.
  double averaged_test_acc = 0.0;
};

/// Called after every epoch; `net` is in Eval mode.
using EpochHook = std::function<void(const EpochRecord&, model::Network<float>& net)>;

/// Test metrics flow only into the report; no training decision reads them.
TrainReport train_loop(model::Network<float>& net, const data::Dataset& train,
                       const data::Dataset& test, const TrainConfig& cfg,
                       const EpochHook& hook = {});

struct Summary {
  std::size_t count = 0;
  double mean_acc = 0.0;
  double std_acc = 0.0;  // sample standard deviation
  double mean_loss = 0.0;
  double std_loss = 0.0;
};

/// Test metrics of the last k epochs of every run, pooled.
Summary summarize_last_k(std::span<const TrainReport> runs, int k);

std::string format_report(const TrainReport& r);

}  // namespace rfcnn::train

#endif  // RFCNN_TRAIN_HPP_
