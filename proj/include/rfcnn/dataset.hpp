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

// Dataset directory layout:
//
//   manifest.txt     "# rfcnn-manifest 1", "# classes <name> <name> ...",
//                    then one "<file>\t<label>\t<frames>\t<source>" per clip
//   <file>           one tensor file per clip, [1, channels, mel, frames]

#ifndef RFCNN_DATASET_HPP_
#define RFCNN_DATASET_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcnn/dsp.hpp"
#include "rfcnn/tensor.hpp"

namespace rfcnn::data {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ManifestEntry {
  std::string file;
  int label = -1;
  std::size_t frames = 0;
  std::string source;
};

struct Manifest {
  std::vector<std::string> classes;
  std::vector<ManifestEntry> entries;
};

std::string format_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);

/// Writes clips and manifest.txt into `dir` (created if missing).
void write_dataset(const std::string& dir, std::span<const dsp::SpectrogramClip> clips,
                   const std::vector<std::string>& classes);

struct ClipSet {
  std::vector<std::string> classes;
  std::vector<dsp::SpectrogramClip> clips;
};

ClipSet read_dataset(const std::string& dir);

/// Equal-shape clips stacked into one batch tensor.
struct Dataset {
  nn::Tensor<float> x;  // [N, C, F, T]
  std::vector<int> labels;
  std::vector<std::string> sources;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

Dataset stack(std::span<const dsp::SpectrogramClip> clips, int num_classes);

}  // namespace rfcnn::data

#endif  // RFCNN_DATASET_HPP_
