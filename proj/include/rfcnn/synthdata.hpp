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

#ifndef RFCNN_SYNTHDATA_HPP_
#define RFCNN_SYNTHDATA_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfcnn/dsp.hpp"

namespace rfcnn::synth {

/// FreqPosition: one shared blob, class = frequency band.
/// PatternOnly: one blob per class, anywhere inside the margins.
enum class TaskKind { FreqPosition, PatternOnly };

struct SynthTask {
  TaskKind kind = TaskKind::FreqPosition;
  int num_classes = 2;
  int mel_bins = 64;
  int frames = 64;
  int pattern_size = 8;
  /// Minimum distance between any blob and the frequency borders.
  int margin = 16;
  /// Distance between consecutive class bands (FreqPosition).
  int band_spacing = 24;
  int channels = 1;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

/// First mel bin of the class-k band: margin + k * band_spacing.
int band_start(const SynthTask& task, int k);

/// The blob, pattern_size x pattern_size, row-major (frequency, time).
std::vector<float> blob(const SynthTask& task, int k);

/// Throws std::invalid_argument if the task does not fit.
void validate(const SynthTask& task);

/// Labels cycle 0..K-1. Clip i depends only on (seed, i).
std::vector<dsp::SpectrogramClip> generate(const SynthTask& task, std::size_t n);

std::vector<std::string> class_names(const SynthTask& task);

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

}  // namespace rfcnn::synth

#endif  // RFCNN_SYNTHDATA_HPP_
