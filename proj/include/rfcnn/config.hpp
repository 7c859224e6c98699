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

// Configuration text: one "key = value" per line, '#' starts a comment.
// Unknown keys and malformed values are errors.

#ifndef RFCNN_CONFIG_HPP_
#define RFCNN_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfcnn/archspec.hpp"
#include "rfcnn/dsp.hpp"
#include "rfcnn/model.hpp"
#include "rfcnn/train.hpp"

namespace rfcnn::cfg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  // model
  int rho = 4;
  arch::Variant variant = arch::Variant::Plain;
  int base_width = 128;
  arch::FreqMode freq_mode = arch::FreqMode::Ratio;
  arch::ShakeLevel shake_level = arch::ShakeLevel::PerSample;

  // dsp
  dsp::PipelineConfig dsp;
  dsp::NormMode norm = dsp::NormMode::PerBin;

  // train; decay epochs <= 0 scale with `epochs`
  int epochs = 350;
  std::size_t batch_size = 32;
  double lr_start = 1e-4;
  double lr_end = 5e-6;
  int decay_start = 0;
  int decay_end = 0;
  std::uint64_t seed = 0;
  int keep_last = 25;
  int last_k = 25;
  int runs = 2;
  bool eval_train = false;

  // augment
  bool mixup = true;
  double mixup_alpha = 0.3;
  bool roll = true;

  // grid
  std::vector<int> grid_rhos = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::vector<arch::Variant> grid_variants = {arch::Variant::Plain};

  train::Schedule schedule() const;
  train::TrainConfig train_config() const;
};

/// Sets one key from its text form.
void set(Config& c, std::string_view key, std::string_view value);
std::string get(const Config& c, std::string_view key);
const std::vector<std::string>& keys();

Config parse_config(std::string_view text, Config base = {});
Config load_config(const std::string& path, Config base = {});

/// Every key, resolved, in parse_config syntax.
std::string format_config(const Config& c);

/// "1-12", "0,2,5" or a mix such as "0-3,8".
std::vector<int> parse_int_list(std::string_view s);

}  // namespace rfcnn::cfg

#endif  // RFCNN_CONFIG_HPP_
