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

#ifndef RFCNN_RFCALC_HPP_
#define RFCNN_RFCALC_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "rfcnn/archspec.hpp"

namespace rfcnn::model {
template <class T>
class Network;
}
namespace rfcnn::nn {
template <class T>
class Tensor;
}

namespace rfcnn::rf {

/// Receptive field and cumulative stride along one axis.
struct RfAxis {
  long rf = 1;
  long jump = 1;
  friend bool operator==(const RfAxis&, const RfAxis&) = default;
};

struct RfState {
  RfAxis f;
  RfAxis t;
  friend bool operator==(const RfState&, const RfState&) = default;
};

/// rf' = rf + (k - 1) * jump, jump' = jump * stride. Non-spatial layers are
/// the identity.
RfState rf_step(RfState state, const arch::LayerSpec& layer);

struct MaxRf {
  long f = 0;
  long t = 0;
  friend bool operator==(const MaxRf&, const MaxRf&) = default;
};

MaxRf max_rf(const arch::NetworkSpec& spec);

struct RfRow {
  int rho = 0;
  MaxRf rf;
};

std::vector<RfRow> rf_table(int rho_min, int rho_max, arch::Variant variant);

/// Published maximum RF for rho = 0..21 (square, so one number per row).
inline constexpr std::array<long, 22> kPublishedMaxRf = {
    23,  31,  39,  55,  71,  87,  103, 135, 167, 199, 231,
    263, 295, 327, 359, 391, 423, 455, 487, 519, 551, 583};

/// Input-plane interval [lo, hi] (inclusive, may extend past the borders)
/// covered by one unit of the last residual block's output.
struct RfInterval {
  long lo = 0;
  long hi = 0;
  long size() const { return hi - lo + 1; }
};

struct RfBox {
  RfInterval f;
  RfInterval t;
};

/// Geometry of the block-12 output grid relative to the input plane.
/// Padding enters here (it shifts the box) but not into max_rf.
RfBox rf_box(const arch::NetworkSpec& spec, long unit_f, long unit_t);

/// Output extent of the block-12 feature map for an input of size (f, t).
std::array<long, 2> feature_extent(const arch::NetworkSpec& spec, long in_f,
                                   long in_t);

/// Binary mask over input pixels.
struct RfMask {
  long freq = 0;
  long time = 0;
  std::vector<std::uint8_t> bits;

  bool at(long f, long t) const {
    return bits[static_cast<size_t>(f * time + t)] != 0;
  }
  long count() const;
  /// True when every set pixel lies inside box (clipped to the plane).
  bool contained_in(const RfBox& box) const;
  /// True when the set pixels are exactly box clipped to the plane.
  bool fills(const RfBox& box) const;
};

struct EmpiricalRf {
  RfMask mask;
  long unit_f = 0;
  long unit_t = 0;
  RfBox box;  // analytic box of the probed unit
};

/// Backpropagates a unit gradient from the spatially central position (all
/// channels) of the block-12 output for sample 0 and marks input pixels
/// with |grad| > 0. Uses the network's current mode; call in Eval mode so
/// batch statistics do not couple positions.
EmpiricalRf empirical_rf(model::Network<double>& net,
                         const nn::Tensor<double>& probe);

}  // namespace rfcnn::rf

#endif  // RFCNN_RFCALC_HPP_
