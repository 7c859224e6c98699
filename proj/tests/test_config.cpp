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

#include "rfcnn/config.hpp"

namespace rfcnn::cfg {
namespace {

TEST(Config, Defaults) {
  const Config c;
  EXPECT_EQ(c.epochs, 350);
  EXPECT_EQ(c.dsp.n_mels, 256u);
  EXPECT_EQ(c.dsp.sample_rate, 22050);
  EXPECT_TRUE(c.dsp.stereo);
  EXPECT_EQ(c.last_k, 25);
  EXPECT_EQ(c.runs, 2);
  const train::Schedule s = c.schedule();
  EXPECT_EQ(s.decay_start_epoch, 50);
  EXPECT_EQ(s.decay_end_epoch, 250);
  EXPECT_DOUBLE_EQ(s.lr_start, 1e-4);
  EXPECT_DOUBLE_EQ(s.lr_end, 5e-6);
}

TEST(Config, ParseWithComments) {
  const Config c = parse_config(
      "# experiment\n"
      "model.rho = 7\n"
      "model.variant = freq-aware   # trailing comment\n"
      "\n"
      "dsp.mels = 128\n"
      "train.epochs = 70\n"
      "norm.mode = global\n"
      "mixup.enabled = false\n"
      "grid.rhos = 0-3,8\n");
  EXPECT_EQ(c.rho, 7);
  EXPECT_EQ(c.variant, arch::Variant::FreqAware);
  EXPECT_EQ(c.dsp.n_mels, 128u);
  EXPECT_EQ(c.norm, dsp::NormMode::Global);
  EXPECT_FALSE(c.mixup);
  EXPECT_EQ(c.grid_rhos, (std::vector<int>{0, 1, 2, 3, 8}));
  EXPECT_EQ(c.schedule().decay_start_epoch, 10);
  EXPECT_EQ(c.train_config().epochs, 70);
}

TEST(Config, FormatRoundTrips) {
  Config c;
  set(c, "model.rho", "11");
  set(c, "train.lr_start", "0.003");
  set(c, "grid.variants", "plain,shake-shake");
  set(c, "dsp.mel_norm", "peak");
  const Config back = parse_config(format_config(c));
  for (const auto& k : keys()) EXPECT_EQ(get(back, k), get(c, k)) << k;
}

TEST(Config, ErrorsNameTheProblem) {
  try {
    parse_config("model.rho = 3\nmodel.depth = 4\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("line 2"), std::string::npos) << m;
    EXPECT_NE(m.find("model.depth"), std::string::npos) << m;
  }
  Config c;
  EXPECT_THROW(set(c, "train.epochs", "many"), ConfigError);
  EXPECT_THROW(set(c, "mixup.enabled", "maybe"), ConfigError);
  EXPECT_THROW(set(c, "model.variant", "wide"), ConfigError);
  EXPECT_THROW(parse_config("no equals sign\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/x.conf"), ConfigError);
  c.decay_start = 100;
  c.decay_end = 20;
  EXPECT_THROW(c.schedule(), ConfigError);
}

TEST(IntList, Forms) {
  EXPECT_EQ(parse_int_list("1-12").size(), 12u);
  EXPECT_EQ(parse_int_list("0,2,5"), (std::vector<int>{0, 2, 5}));
  EXPECT_THROW(parse_int_list("5-2"), ConfigError);
  EXPECT_THROW(parse_int_list(""), ConfigError);
  EXPECT_THROW(parse_int_list("a"), ConfigError);
}

}  // namespace
}  // namespace rfcnn::cfg
