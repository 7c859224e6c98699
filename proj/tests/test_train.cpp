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

#include <cmath>
#include <numeric>

#include "rfcnn/synthdata.hpp"
#include "rfcnn/train.hpp"
#include "test_util.hpp"

namespace rfcnn::train {
namespace {

TEST(Schedule, Breakpoints) {
  const Schedule s;
  EXPECT_DOUBLE_EQ(s.lr_at(1), 1e-4);
  EXPECT_DOUBLE_EQ(s.lr_at(50), 1e-4);
  EXPECT_DOUBLE_EQ(s.lr_at(150), 1e-4 + (5e-6 - 1e-4) * 0.5);
  EXPECT_DOUBLE_EQ(s.lr_at(250), 5e-6);
  EXPECT_DOUBLE_EQ(s.lr_at(350), 5e-6);
  EXPECT_THROW(s.lr_at(0), TrainError);
  EXPECT_THROW(s.lr_at(351), TrainError);
  for (int e = 2; e <= 350; ++e) EXPECT_LE(s.lr_at(e), s.lr_at(e - 1));
}

TEST(Schedule, Scaled) {
  const Schedule s = Schedule::scaled(70);
  EXPECT_EQ(s.decay_start_epoch, 10);
  EXPECT_EQ(s.decay_end_epoch, 50);
  EXPECT_EQ(Schedule::scaled(350).decay_end_epoch, 250);
}

TEST(Adam, MatchesReferenceUpdates) {
  std::vector<double> w = {0.5, -1.0, 2.0}, g(3);
  std::vector<model::ParamRef<double>> params{{"w", w, g}};
  AdamState<double> st;
  // Reference: bias-corrected Adam, scalar per element.
  std::vector<double> rw = w, m(3, 0.0), v(3, 0.0);
  const double lr = 0.01;
  for (int step = 1; step <= 5; ++step) {
    for (int j = 0; j < 3; ++j) g[j] = rw[j] * rw[j] - 0.3 * j + step;
    for (int j = 0; j < 3; ++j) {
      m[j] = 0.9 * m[j] + 0.1 * g[j];
      v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
      const double mh = m[j] / (1 - std::pow(0.9, step));
      const double vh = v[j] / (1 - std::pow(0.999, step));
      rw[j] -= lr * mh / (std::sqrt(vh) + 1e-8);
    }
    adam_step<double>(params, st, lr);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(w[j], rw[j], 1e-12) << "step " << step;
  }
  EXPECT_EQ(st.step, 5u);
}

TEST(Adam, FirstStepIsLrTimesSign) {
  std::vector<double> w = {0.0, 0.0}, g = {3.0, -0.002};
  std::vector<model::ParamRef<double>> params{{"w", w, g}};
  AdamState<double> st;
  adam_step<double>(params, st, 0.1);
  EXPECT_NEAR(w[0], -0.1, 1e-8);
  EXPECT_NEAR(w[1], 0.1, 1e-5);
}

TEST(Adam, RejectsNonFiniteWithoutUpdating) {
  std::vector<double> w = {1.0, 2.0}, g = {0.1, std::nan("")};
  std::vector<model::ParamRef<double>> params{{"block3.conv.w", w, g}};
  AdamState<double> st;
  try {
    adam_step<double>(params, st, 0.1);
    FAIL();
  } catch (const TrainError& e) {
    EXPECT_NE(std::string(e.what()).find("block3.conv.w"), std::string::npos);
  }
  EXPECT_EQ(w, (std::vector<double>{1.0, 2.0}));
}

TEST(CrossEntropy, UniformLogits) {
  const Tensor<double> z({2, 10, 1, 1}, 0.0);
  const std::vector<int> labels = {3, 7};
  const auto r = cross_entropy(z, one_hot(labels, 10));
  EXPECT_NEAR(r.loss, std::log(10.0), 1e-12);
  EXPECT_NEAR(r.grad(0, 3, 0, 0), (0.1 - 1.0) / 2.0, 1e-12);
  EXPECT_NEAR(r.grad(1, 0, 0, 0), 0.1 / 2.0, 1e-12);
}

TEST(CrossEntropy, GradientMatchesFiniteDifferences) {
  auto z = testing::random_tensor<double>({3, 4, 1, 1}, 21, -3.0, 3.0);
  const std::vector<double> y = {0.2, 0.8, 0, 0, 0, 0, 1, 0, 0.25, 0.25, 0.25, 0.25};
  const auto r = cross_entropy(z, y);
  const auto num = testing::numeric_grad(z.values(), [&] { return cross_entropy(z, y).loss; });
  EXPECT_LT(testing::rel_error(std::span<const double>(r.grad.values()), std::span<const double>(num)),
            1e-7);
}

TEST(CrossEntropy, LargeLogitsStayFinite) {
  const Tensor<double> z({1, 2, 1, 1}, std::vector<double>{1000.0, -1000.0});
  const auto r = cross_entropy(z, one_hot(std::vector<int>{1}, 2));
  EXPECT_NEAR(r.loss, 2000.0, 1e-9);
  const Tensor<double> bad({1, 2, 1, 1}, std::vector<double>{INFINITY, 0.0});
  EXPECT_THROW(cross_entropy(bad, one_hot(std::vector<int>{1}, 2)), TrainError);
}

TEST(Predictions, AverageAndArgmax) {
  const Tensor<float> a({2, 3, 1, 1}, std::vector<float>{0.6f, 0.3f, 0.1f, 0.2f, 0.2f, 0.6f});
  const Tensor<float> b({2, 3, 1, 1}, std::vector<float>{0.0f, 1.0f, 0.0f, 0.2f, 0.4f, 0.4f});
  const std::vector<Tensor<float>> v = {a, b};
  const auto avg = average_predictions<float>(v);
  EXPECT_FLOAT_EQ(avg(0, 1, 0, 0), 0.65f);
  EXPECT_EQ(argmax_rows(avg), (std::vector<int>{1, 2}));
  // Ties go to the lowest index.
  EXPECT_EQ(argmax_rows(Tensor<float>({1, 3, 1, 1}, 1.0f)), (std::vector<int>{0}));
}

TEST(Summary, PooledOverRuns) {
  std::vector<TrainReport> runs(2);
  std::vector<double> accs;
  for (int r = 0; r < 2; ++r) {
    for (int e = 1; e <= 30; ++e) {
      EpochRecord rec;
      rec.epoch = e;
      rec.test_acc = 0.01 * e + 0.1 * r;
      rec.test_loss = 1.0;
      runs[r].epochs.push_back(rec);
      if (e > 5) accs.push_back(rec.test_acc);
    }
  }
  const Summary s = summarize_last_k(runs, 25);
  ASSERT_EQ(s.count, 50u);
  const double mean = std::accumulate(accs.begin(), accs.end(), 0.0) / 50.0;
  double ss = 0.0;
  for (double a : accs) ss += (a - mean) * (a - mean);
  EXPECT_NEAR(s.mean_acc, mean, 1e-12);
  EXPECT_NEAR(s.std_acc, std::sqrt(ss / 49.0), 1e-12);
  EXPECT_DOUBLE_EQ(s.std_loss, 0.0);
  EXPECT_THROW(summarize_last_k(runs, 31), TrainError);
}

data::Dataset tiny_set(std::uint64_t seed, std::size_t n) {
  synth::SynthTask t;
  t.mel_bins = 32;
  t.frames = 16;
  t.margin = 4;
  t.pattern_size = 4;
  t.band_spacing = 12;
  t.seed = seed;
  const auto clips = synth::generate(t, n);
  return data::stack(clips, t.num_classes);
}

TEST(TrainLoop, DeterministicForFixedSeed) {
  const auto train_set = tiny_set(1, 12);
  const auto test_set = tiny_set(2, 6);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.schedule = Schedule::scaled(3, 1e-3, 1e-4);
  cfg.batch_size = 5;
  cfg.keep_last = 2;
  cfg.seed = 4;
  const auto spec = arch::make_network(arch::Rho(1), arch::Variant::Plain, 2, 2, 1);
  auto run = [&] {
    auto net = model::Network<float>::init(spec, 8);
    int hooks = 0;
    auto rep = train_loop(net, train_set, test_set, cfg,
                          [&](const EpochRecord&, model::Network<float>& n) {
                            ++hooks;
                            EXPECT_EQ(n.mode(), nn::Mode::Eval);
                          });
    EXPECT_EQ(hooks, 3);
    return rep;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.epochs.size(), 3u);
  ASSERT_EQ(a.recent_probs.size(), 2u);
  for (int e = 0; e < 3; ++e) {
    EXPECT_EQ(a.epochs[e].train_loss, b.epochs[e].train_loss);
    EXPECT_EQ(a.epochs[e].test_acc, b.epochs[e].test_acc);
    EXPECT_DOUBLE_EQ(a.epochs[e].lr, cfg.schedule.lr_at(e + 1));
  }
  EXPECT_EQ(a.recent_probs.back(), b.recent_probs.back());
  EXPECT_GE(a.averaged_test_acc, 0.0);
  EXPECT_LE(a.averaged_test_acc, 1.0);
}

TEST(Evaluate, RestoresModeAndScoresProbabilities) {
  const auto ds = tiny_set(3, 4);
  auto net = model::Network<float>::init(
      arch::make_network(arch::Rho(0), arch::Variant::Plain, 2, 2, 1), 1);
  net.set_mode(nn::Mode::Train);
  const EvalResult r = evaluate(net, ds, 3);
  EXPECT_EQ(net.mode(), nn::Mode::Train);
  EXPECT_EQ(r.probs.batch(), 4u);
  for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(r.probs(n, 0, 0, 0) + r.probs(n, 1, 0, 0), 1.0, 1e-5);
}

}  // namespace
}  // namespace rfcnn::train
