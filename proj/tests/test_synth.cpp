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

#include "rfcnn/synthdata.hpp"

namespace rfcnn::synth {
namespace {

// Bounding box of values above a threshold in channel 0.
struct Box {
  int f0 = 1 << 30, f1 = -1, t0 = 1 << 30, t1 = -1;
};

Box blob_box(const dsp::SpectrogramClip& c, float thr = 0.3f) {
  Box b;
  for (std::size_t f = 0; f < c.values.freq(); ++f)
    for (std::size_t t = 0; t < c.values.time(); ++t)
      if (c.values(0, 0, f, t) > thr) {
        b.f0 = std::min(b.f0, static_cast<int>(f));
        b.f1 = std::max(b.f1, static_cast<int>(f));
        b.t0 = std::min(b.t0, static_cast<int>(t));
        b.t1 = std::max(b.t1, static_cast<int>(t));
      }
  return b;
}

TEST(Synth, TwoClassBands) {
  SynthTask t;
  t.mel_bins = 64;
  t.pattern_size = 8;
  t.margin = 16;
  t.band_spacing = 24;
  t.noise = 0.02;
  EXPECT_EQ(band_start(t, 0), 16);
  EXPECT_EQ(band_start(t, 1), 40);
  const auto clips = generate(t, 10);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const Box b = blob_box(clips[i]);
    const int lo = clips[i].label == 0 ? 16 : 40;
    EXPECT_EQ(b.f0, lo) << i;
    EXPECT_EQ(b.f1, lo + 7) << i;
    EXPECT_EQ(b.t1 - b.t0, 7) << i;
  }
}

TEST(Synth, DeterministicAndBalanced) {
  SynthTask t;
  t.num_classes = 3;
  t.mel_bins = 96;
  t.band_spacing = 16;
  t.seed = 7;
  const auto a = generate(t, 30);
  const auto b = generate(t, 31);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    EXPECT_EQ(a[i].label, static_cast<int>(i % 3));
  }
  t.seed = 8;
  EXPECT_FALSE(generate(t, 1 + 2)[0].values == a[0].values);
}

TEST(Synth, SharedBlobForPositionTask) {
  SynthTask t;
  EXPECT_EQ(blob(t, 0), blob(t, 1));
  t.kind = TaskKind::PatternOnly;
  EXPECT_NE(blob(t, 0), blob(t, 1));
}

TEST(Synth, PatternOnlyStaysInsideMargins) {
  SynthTask t;
  t.kind = TaskKind::PatternOnly;
  t.noise = 0.01;
  for (const auto& c : generate(t, 40)) {
    const Box b = blob_box(c);
    EXPECT_GE(b.f0, t.margin);
    EXPECT_LE(b.f1, t.mel_bins - t.margin - 1);
  }
}

TEST(Synth, Errors) {
  SynthTask t;
  t.num_classes = 3;  // needs 16 + 2*24 + 8 + 16 = 88 bins
  EXPECT_THROW(validate(t), std::invalid_argument);
  t.mel_bins = 88;
  EXPECT_NO_THROW(validate(t));
  t.band_spacing = 4;
  EXPECT_THROW(validate(t), std::invalid_argument);
  SynthTask u;
  EXPECT_THROW(generate(u, 1), std::invalid_argument);
  EXPECT_THROW(parse_task_kind("stripes"), std::invalid_argument);
  EXPECT_EQ(parse_task_kind(to_string(TaskKind::PatternOnly)), TaskKind::PatternOnly);
  EXPECT_EQ(class_names(u), (std::vector<std::string>{"class0", "class1"}));
}

}  // namespace
}  // namespace rfcnn::synth
