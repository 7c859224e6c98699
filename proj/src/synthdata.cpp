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

#include <random>
#include <stdexcept>

#include "rfcnn/synthdata.hpp"

namespace rfcnn::synth {

namespace {

constexpr std::uint64_t kBlobSeed = 0x5eedb10bULL;

std::mt19937_64 clip_rng(std::uint64_t seed, std::size_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

int band_start(const SynthTask& task, int k) { return task.margin + k * task.band_spacing; }

void validate(const SynthTask& t) {
  if (t.num_classes < 2) throw std::invalid_argument("synth: need at least 2 classes");
  if (t.pattern_size < 1 || t.frames < t.pattern_size || t.margin < 0 || t.channels < 1) {
    throw std::invalid_argument("synth: bad pattern size, frames, margin or channels");
  }
  const int needed = t.kind == TaskKind::FreqPosition
                         ? band_start(t, t.num_classes - 1) + t.pattern_size + t.margin
                         : 2 * t.margin + t.pattern_size;
  if (t.kind == TaskKind::FreqPosition && t.band_spacing < t.pattern_size) {
    throw std::invalid_argument("synth: band spacing smaller than the pattern");
  }
  if (needed > t.mel_bins) {
    throw std::invalid_argument("synth: pattern + margin need " + std::to_string(needed) +
                                " mel bins, have " + std::to_string(t.mel_bins));
  }
}

std::vector<float> blob(const SynthTask& task, int k) {
  const int id = task.kind == TaskKind::FreqPosition ? 0 : k;
  std::mt19937_64 rng(kBlobSeed + static_cast<std::uint64_t>(id));
  std::uniform_real_distribution<float> u(0.5f, 1.0f);
  std::vector<float> b(static_cast<std::size_t>(task.pattern_size * task.pattern_size));
  for (float& v : b) v = u(rng);
  return b;
}

std::vector<dsp::SpectrogramClip> generate(const SynthTask& task, std::size_t n) {
  validate(task);
  if (n < static_cast<std::size_t>(task.num_classes)) {
    throw std::invalid_argument("synth: n must be at least the number of classes");
  }
  std::vector<std::vector<float>> blobs;
  for (int k = 0; k < task.num_classes; ++k) blobs.push_back(blob(task, k));

  const auto P = static_cast<std::size_t>(task.pattern_size);
  std::vector<dsp::SpectrogramClip> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = clip_rng(task.seed, i);
    const int label = static_cast<int>(i % static_cast<std::size_t>(task.num_classes));
    auto& clip = out[i];
    clip.label = label;
    clip.source_id = "synth/" + std::string(to_string(task.kind)) + "/" +
                     std::to_string(task.seed) + "/" + std::to_string(i);
    clip.values = nn::Tensor<float>({1, static_cast<std::size_t>(task.channels),
                                     static_cast<std::size_t>(task.mel_bins),
                                     static_cast<std::size_t>(task.frames)});
    std::normal_distribution<float> noise(0.0f, static_cast<float>(task.noise));
    for (float& v : clip.values.values()) v = noise(rng);

    std::uniform_int_distribution<int> tpos(0, task.frames - task.pattern_size);
    const int t0 = tpos(rng);
    int f0 = band_start(task, label);
    if (task.kind == TaskKind::PatternOnly) {
      std::uniform_int_distribution<int> fpos(task.margin,
                                              task.mel_bins - task.margin - task.pattern_size);
      f0 = fpos(rng);
    }
    const auto& b = blobs[static_cast<std::size_t>(label)];
    for (std::size_t c = 0; c < clip.values.channels(); ++c) {
      for (std::size_t df = 0; df < P; ++df) {
        for (std::size_t dt = 0; dt < P; ++dt) {
          clip.values(0, c, static_cast<std::size_t>(f0) + df, static_cast<std::size_t>(t0) + dt) +=
              b[df * P + dt];
        }
      }
    }
  }
  return out;
}

std::vector<std::string> class_names(const SynthTask& task) {
  std::vector<std::string> names;
  for (int k = 0; k < task.num_classes; ++k) names.push_back("class" + std::to_string(k));
  return names;
}

std::string_view to_string(TaskKind k) {
  return k == TaskKind::FreqPosition ? "freq-position" : "pattern-only";
}

TaskKind parse_task_kind(std::string_view s) {
  if (s == "freq-position" || s == "FreqPosition") return TaskKind::FreqPosition;
  if (s == "pattern-only" || s == "PatternOnly") return TaskKind::PatternOnly;
  throw std::invalid_argument("unknown synthetic task '" + std::string(s) +
                              "' (freq-position, pattern-only)");
}

}  // namespace rfcnn::synth
