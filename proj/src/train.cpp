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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "rfcnn/augment.hpp"
#include "rfcnn/train.hpp"

namespace rfcnn::train {

Schedule Schedule::scaled(int total_epochs, double lr_start, double lr_end) {
  if (total_epochs < 1) throw TrainError("schedule: total_epochs must be positive");
  Schedule s;
  s.lr_start = lr_start;
  s.lr_end = lr_end;
  s.total_epochs = total_epochs;
  s.decay_start_epoch = static_cast<int>(std::lround(50.0 * total_epochs / 350.0));
  s.decay_end_epoch = static_cast<int>(std::lround(250.0 * total_epochs / 350.0));
  return s;
}

double Schedule::lr_at(int epoch) const {
  if (epoch < 1 || epoch > total_epochs) {
    throw TrainError("lr_at: epoch " + std::to_string(epoch) + " outside [1, " +
                     std::to_string(total_epochs) + "]");
  }
  if (epoch <= decay_start_epoch) return lr_start;
  if (epoch >= decay_end_epoch) return lr_end;
  const double frac = static_cast<double>(epoch - decay_start_epoch) /
                      static_cast<double>(decay_end_epoch - decay_start_epoch);
  return lr_start + (lr_end - lr_start) * frac;
}

template <class T>
void adam_step(std::span<const model::ParamRef<T>> params, AdamState<T>& st, double lr) {
  if (st.m.empty()) {
    for (const auto& p : params) {
      st.m.emplace_back(p.value.size(), T{});
      st.v.emplace_back(p.value.size(), T{});
    }
  }
  if (st.m.size() != params.size()) throw TrainError("adam_step: parameter list changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.grad.size() != p.value.size() || st.m[i].size() != p.value.size()) {
      throw TrainError("adam_step: size mismatch for parameter " + p.name);
    }
    for (T g : p.grad) {
      if (!std::isfinite(g)) throw TrainError("adam_step: non-finite gradient in " + p.name);
    }
  }
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(st.beta1, t);
  const double c2 = 1.0 - std::pow(st.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    auto& m = st.m[i];
    auto& v = st.v[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j];
      const double mj = st.beta1 * m[j] + (1.0 - st.beta1) * g;
      const double vj = st.beta2 * v[j] + (1.0 - st.beta2) * g * g;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double update = lr * (mj / c1) / (std::sqrt(vj / c2) + st.eps);
      p.value[j] = static_cast<T>(p.value[j] - update);
    }
  }
}

template <class T>
LossResult<T> cross_entropy(const Tensor<T>& logits, std::span<const double> targets) {
  const std::size_t N = logits.batch();
  const std::size_t K = logits.channels();
  if (logits.freq() != 1 || logits.time() != 1) {
    throw nn::ShapeError("cross_entropy: logits must be [N, K, 1, 1], got " +
                         nn::shape_string(logits.shape()));
  }
  if (targets.size() != N * K) throw nn::ShapeError("cross_entropy: target size mismatch");
  if (N == 0) throw TrainError("cross_entropy: empty batch");
  LossResult<T> r;
  r.grad = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const T* z = logits.data() + n * K;
    const double* y = targets.data() + n * K;
    double zmax = -INFINITY;
    for (std::size_t k = 0; k < K; ++k) {
      if (!std::isfinite(z[k])) throw TrainError("cross_entropy: non-finite logit");
      zmax = std::max(zmax, static_cast<double>(z[k]));
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) sum += std::exp(z[k] - zmax);
    const double lse = zmax + std::log(sum);
    double ysum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      total -= y[k] * (z[k] - lse);
      ysum += y[k];
    }
    for (std::size_t k = 0; k < K; ++k) {
      const double p = std::exp(z[k] - lse);
      r.grad[n * K + k] = static_cast<T>((p * ysum - y[k]) / static_cast<double>(N));
    }
  }
  r.loss = total / static_cast<double>(N);
  return r;
}

std::vector<double> one_hot(std::span<const int> labels, int classes) {
  std::vector<double> y(labels.size() * static_cast<std::size_t>(classes), 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes) {
      throw TrainError("label " + std::to_string(labels[i]) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
    y[i * static_cast<std::size_t>(classes) + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return y;
}

template <class T>
Tensor<T> average_predictions(std::span<const Tensor<T>> probs) {
  if (probs.empty()) throw TrainError("average_predictions: no inputs");
  std::vector<double> acc(probs[0].size(), 0.0);
  for (const auto& p : probs) {
    if (p.shape() != probs[0].shape()) {
      throw nn::ShapeError("average_predictions: shape " + nn::shape_string(p.shape()) +
                           " differs from " + nn::shape_string(probs[0].shape()));
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
  }
  Tensor<T> out(probs[0].shape());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = static_cast<T>(acc[i] / static_cast<double>(probs.size()));
  }
  return out;
}

template <class T>
std::vector<int> argmax_rows(const Tensor<T>& probs) {
  const std::size_t K = probs.channels() * probs.freq() * probs.time();
  std::vector<int> out(probs.batch());
  for (std::size_t n = 0; n < probs.batch(); ++n) {
    const T* row = probs.data() + n * K;
    out[n] = static_cast<int>(std::max_element(row, row + K) - row);
  }
  return out;
}

namespace {

Tensor<float> gather(const Tensor<float>& x, std::span<const std::size_t> idx) {
  const nn::Shape s = x.shape();
  Tensor<float> out({idx.size(), s[1], s[2], s[3]});
  const std::size_t per = s[1] * s[2] * s[3];
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy(x.sample(idx[i]), x.sample(idx[i]) + per, out.sample(i));
  }
  return out;
}

double accuracy(std::span<const int> pred, std::span<const int> labels) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == labels[i];
  return pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
}

void check_dataset(const data::Dataset& ds, int classes, const char* what) {
  if (ds.size() == 0) throw TrainError(std::string(what) + " set is empty");
  for (int l : ds.labels) {
    if (l < 0 || l >= classes) {
      throw TrainError(std::string(what) + " set has label " + std::to_string(l) +
                       " outside [0, " + std::to_string(classes) + ")");
    }
  }
}

}  // namespace

EvalResult evaluate(model::Network<float>& net, const data::Dataset& ds, std::size_t batch_size) {
  const model::Mode prev = net.mode();
  net.set_mode(model::Mode::Eval);
  const std::size_t N = ds.size();
  const auto K = static_cast<std::size_t>(net.spec().num_classes);
  EvalResult r;
  r.probs = Tensor<float>({N, K, 1, 1});
  double loss = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < N; start += batch_size) {
    const std::size_t end = std::min(N, start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const Tensor<float> logits = net.forward(gather(ds.x, idx));
    const auto y = one_hot(std::span(ds.labels).subspan(start, end - start), static_cast<int>(K));
    loss += cross_entropy(logits, y).loss * static_cast<double>(end - start);
    const Tensor<float> p = nn::softmax(logits);
    std::copy(p.data(), p.data() + p.size(), r.probs.data() + start * K);
  }
  net.set_mode(prev);
  r.loss = loss / static_cast<double>(N);
  r.accuracy = accuracy(argmax_rows(r.probs), ds.labels);
  return r;
}

TrainReport train_loop(model::Network<float>& net, const data::Dataset& train,
                       const data::Dataset& test, const TrainConfig& cfg, const EpochHook& hook) {
  const int K = net.spec().num_classes;
  check_dataset(train, K, "training");
  check_dataset(test, K, "test");
  if (cfg.epochs < 1 || cfg.epochs > cfg.schedule.total_epochs) {
    throw TrainError("train_loop: epochs must be in [1, schedule.total_epochs]");
  }
  if (cfg.batch_size < 1) throw TrainError("train_loop: batch_size must be positive");
  if (train.size() < 2) throw TrainError("train_loop: need at least 2 training samples");

  aug::Rng rng(cfg.seed);
  AdamState<float> adam;
  TrainReport report;
  const std::size_t N = train.size();
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = cfg.schedule.lr_at(epoch);
    net.set_mode(model::Mode::Train);
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < N;) {
      std::size_t end = std::min(N, start + cfg.batch_size);
      // Batch statistics need two samples; fold a trailing singleton in.
      if (N - end == 1) end = N;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      Tensor<float> x = gather(train.x, idx);
      std::vector<int> labels;
      for (std::size_t i : idx) labels.push_back(train.labels[i]);
      std::vector<double> y = one_hot(labels, K);
      if (cfg.roll) x = aug::roll_time(x, rng);
      if (cfg.mixup) aug::mixup_batch(x, y, static_cast<std::size_t>(K), cfg.mixup_alpha, rng);

      const Tensor<float> logits = net.forward(x);
      const LossResult<float> lr = cross_entropy(logits, y);
      net.backward(lr.grad);
      const auto params = net.parameters();
      adam_step<float>(params, adam, rec.lr);

      loss_sum += lr.loss * static_cast<double>(idx.size());
      const auto pred = argmax_rows(logits);
      for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
      start = end;
    }
    rec.train_loss = loss_sum / static_cast<double>(N);
    rec.train_acc = static_cast<double>(hits) / static_cast<double>(N);

    if (cfg.eval_train) rec.eval_train_acc = evaluate(net, train, cfg.batch_size).accuracy;
    EvalResult ev = evaluate(net, test, cfg.batch_size);
    rec.test_loss = ev.loss;
    rec.test_acc = ev.accuracy;
    report.recent_probs.push_back(std::move(ev.probs));
    if (static_cast<int>(report.recent_probs.size()) > std::max(cfg.keep_last, 1)) {
      report.recent_probs.erase(report.recent_probs.begin());
    }
    report.epochs.push_back(rec);
    net.set_mode(model::Mode::Eval);
    if (hook) hook(rec, net);
  }
  const Tensor<float> avg = average_predictions<float>(report.recent_probs);
  report.averaged_test_acc = accuracy(argmax_rows(avg), test.labels);
  return report;
}

Summary summarize_last_k(std::span<const TrainReport> runs, int k) {
  if (runs.empty()) throw TrainError("summarize_last_k: no runs");
  if (k < 1) throw TrainError("summarize_last_k: k must be positive");
  std::vector<double> acc, loss;
  for (const auto& r : runs) {
    if (static_cast<std::size_t>(k) > r.epochs.size()) {
      throw TrainError("summarize_last_k: k = " + std::to_string(k) + " exceeds the " +
                       std::to_string(r.epochs.size()) + " recorded epochs");
    }
    for (std::size_t i = r.epochs.size() - static_cast<std::size_t>(k); i < r.epochs.size(); ++i) {
      acc.push_back(r.epochs[i].test_acc);
      loss.push_back(r.epochs[i].test_loss);
    }
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  Summary s;
  s.count = acc.size();
  stats(acc, s.mean_acc, s.std_acc);
  stats(loss, s.mean_loss, s.std_loss);
  return s;
}

std::string format_report(const TrainReport& r) {
  std::ostringstream os;
  char buf[256];
  for (const auto& e : r.epochs) {
    std::snprintf(buf, sizeof buf,
                  "epoch=%d lr=%.6g train_loss=%.6f train_acc=%.4f eval_train_acc=%.4f "
                  "test_loss=%.6f test_acc=%.4f\n",
                  e.epoch, e.lr, e.train_loss, e.train_acc, e.eval_train_acc, e.test_loss,
                  e.test_acc);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "averaged_test_acc=%.4f snapshots=%zu\n", r.averaged_test_acc,
                r.recent_probs.size());
  os << buf;
  return os.str();
}

#define RFCNN_INSTANTIATE(T)                                                               \
  template void adam_step(std::span<const model::ParamRef<T>>, AdamState<T>&, double);     \
  template LossResult<T> cross_entropy(const Tensor<T>&, std::span<const double>);         \
  template Tensor<T> average_predictions(std::span<const Tensor<T>>);                      \
  template std::vector<int> argmax_rows(const Tensor<T>&);

RFCNN_INSTANTIATE(float)
RFCNN_INSTANTIATE(double)

#undef RFCNN_INSTANTIATE

}  // namespace rfcnn::train
