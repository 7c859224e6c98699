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

#ifndef RFCNN_ARCHSPEC_HPP_
#define RFCNN_ARCHSPEC_HPP_

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rfcnn::arch {

/// Number of controllable residual-block kernels (two per block for blocks 2..12).
inline constexpr int kNumControlledKernels = 22;
inline constexpr int kNumBlocks = 12;

/// Receptive-field control parameter. Kernels x_1..x_rho are 3x3, the rest 1x1.
class Rho {
 public:
  explicit Rho(int value) : value_(value) {
    if (value < 0 || value > kNumControlledKernels) {
      throw std::out_of_range("rho must be in [0, 22], got " +
                              std::to_string(value));
    }
  }
  int value() const noexcept { return value_; }
  friend bool operator==(const Rho&, const Rho&) = default;

 private:
  int value_;
};

enum class LayerKind {
  Conv,
  MaxPool,
  BatchNorm,
  ReLU,
  FreqConcat,
  GlobalAvgPool,
  Linear
};

enum class Variant { Plain, PreAct, ShakeShake, FreqAware };

/// Value of the appended frequency channel: f/F, or rescaled to [-1, 1].
enum class FreqMode { Ratio, Normalized };

/// Granularity of the shake coefficients.
enum class ShakeLevel { PerSample, PerBatch };

struct Extent2 {
  int f = 1;
  int t = 1;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::Conv;
  Extent2 kernel{1, 1};
  Extent2 stride{1, 1};
  Extent2 padding{0, 0};
  int in_channels = 1;
  int out_channels = 1;

  bool spatial() const noexcept {
    return kind == LayerKind::Conv || kind == LayerKind::MaxPool;
  }
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Conv layer with "same" padding for odd kernels.
LayerSpec conv_layer(int kernel, int stride, int in_channels, int out_channels);
LayerSpec maxpool_layer(int channels);

struct BlockSpec {
  int index = 1;
  int conv_a_kernel = 3;
  int conv_b_kernel = 1;
  int width = 1;
  bool pooled = false;
  Variant variant = Variant::Plain;
  friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Global average pooling followed by one fully connected layer.
struct HeadSpec {
  int in_features = 1;
  int num_classes = 2;
  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

/// Machine-readable form of the twelve-block architecture table.
struct NetworkSpec {
  LayerSpec input_conv;
  std::vector<BlockSpec> blocks;
  HeadSpec head;
  int num_classes = 2;
  int in_channels = 2;
  int base_width = 128;
  bool freq_aware = false;
  Variant variant = Variant::Plain;
  FreqMode freq_mode = FreqMode::Ratio;
  ShakeLevel shake_level = ShakeLevel::PerSample;
  std::array<int, kNumControlledKernels> x{};

  /// Channels entering block `index` (1-based).
  int block_in_channels(int index) const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::array<int, kNumControlledKernels> rho_to_kernels(Rho rho);

NetworkSpec make_network(Rho rho, Variant variant, int num_classes,
                         int base_width, int in_channels);

/// Checks every structural invariant; throws SpecError naming the field.
void validate(const NetworkSpec& spec);

/// Flattened main path: stem, per-block layers in execution order, head.
/// For ShakeShake only one branch is listed (both share the layout).
std::vector<LayerSpec> layer_sequence(const NetworkSpec& spec);

/// Versioned line-oriented text form. See README for the grammar.
std::string serialize_spec(const NetworkSpec& spec);
NetworkSpec parse_spec(std::string_view text);

/// Human-readable block table, one row per residual block.
std::string format_table(const NetworkSpec& spec);

std::string_view to_string(Variant v);
std::string_view to_string(LayerKind k);
std::string_view to_string(FreqMode m);
std::string_view to_string(ShakeLevel l);
Variant parse_variant(std::string_view s);
FreqMode parse_freq_mode(std::string_view s);
ShakeLevel parse_shake_level(std::string_view s);

}  // namespace rfcnn::arch

#endif  // RFCNN_ARCHSPEC_HPP_
