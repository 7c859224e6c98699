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

#include "rfcnn/rfcalc.hpp"

#include <algorithm>
#include <stdexcept>

namespace rfcnn::rf {

RfState rf_step(RfState state, const arch::LayerSpec& layer) {
  if (!layer.spatial()) return state;
  state.f.rf += (layer.kernel.f - 1) * state.f.jump;
  state.f.jump *= layer.stride.f;
  state.t.rf += (layer.kernel.t - 1) * state.t.jump;
  state.t.jump *= layer.stride.t;
  return state;
}

MaxRf max_rf(const arch::NetworkSpec& spec) {
  RfState s;
  for (const arch::LayerSpec& l : arch::layer_sequence(spec)) s = rf_step(s, l);
  return {s.f.rf, s.t.rf};
}

std::vector<RfRow> rf_table(int rho_min, int rho_max, arch::Variant variant) {
  if (rho_min < 0 || rho_max > arch::kNumControlledKernels ||
      rho_min > rho_max) {
    throw std::out_of_range("rho range must satisfy 0 <= min <= max <= 22");
  }
  std::vector<RfRow> rows;
  for (int rho = rho_min; rho <= rho_max; ++rho) {
    // Width and class count do not affect the RF; use the smallest legal net.
    auto spec = arch::make_network(arch::Rho(rho), variant, 2, 1, 1);
    rows.push_back({rho, max_rf(spec)});
  }
  return rows;
}

RfBox rf_box(const arch::NetworkSpec& spec, long unit_f, long unit_t) {
  RfInterval f, t;
  long jf = 1, jt = 1;
  for (const arch::LayerSpec& l : arch::layer_sequence(spec)) {
    if (l.kind == arch::LayerKind::GlobalAvgPool) break;
    if (!l.spatial()) continue;
    f.lo -= l.padding.f * jf;
    f.hi += (l.kernel.f - 1 - l.padding.f) * jf;
    t.lo -= l.padding.t * jt;
    t.hi += (l.kernel.t - 1 - l.padding.t) * jt;
    jf *= l.stride.f;
    jt *= l.stride.t;
  }
  f.lo += unit_f * jf;
  f.hi += unit_f * jf;
  t.lo += unit_t * jt;
  t.hi += unit_t * jt;
  return {f, t};
}

std::array<long, 2> feature_extent(const arch::NetworkSpec& spec, long in_f,
                                   long in_t) {
  long f = in_f, t = in_t;
  for (const arch::LayerSpec& l : arch::layer_sequence(spec)) {
    if (l.kind == arch::LayerKind::GlobalAvgPool) break;
    if (!l.spatial()) continue;
    f = (f + 2 * l.padding.f - l.kernel.f) / l.stride.f + 1;
    t = (t + 2 * l.padding.t - l.kernel.t) / l.stride.t + 1;
    if (f < 1 || t < 1) return {0, 0};
  }
  return {f, t};
}

long RfMask::count() const {
  return static_cast<long>(std::count(bits.begin(), bits.end(), 1));
}

bool RfMask::contained_in(const RfBox& box) const {
  for (long f = 0; f < freq; ++f) {
    for (long t = 0; t < time; ++t) {
      if (!at(f, t)) continue;
      if (f < box.f.lo || f > box.f.hi || t < box.t.lo || t > box.t.hi) {
        return false;
      }
    }
  }
  return true;
}

bool RfMask::fills(const RfBox& box) const {
  for (long f = 0; f < freq; ++f) {
    for (long t = 0; t < time; ++t) {
      bool inside =
          f >= box.f.lo && f <= box.f.hi && t >= box.t.lo && t <= box.t.hi;
      if (inside != at(f, t)) return false;
    }
  }
  return true;
}

}  // namespace rfcnn::rf
