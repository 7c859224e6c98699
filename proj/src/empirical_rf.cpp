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

#include <cmath>

#include "rfcnn/model.hpp"
#include "rfcnn/rfcalc.hpp"

namespace rfcnn::rf {

EmpiricalRf empirical_rf(model::Network<double>& net,
                         const nn::Tensor<double>& probe) {
  nn::Tensor<double> features = net.forward_features(probe);
  EmpiricalRf out;
  out.unit_f = static_cast<long>(features.freq() / 2);
  out.unit_t = static_cast<long>(features.time() / 2);
  out.box = rf_box(net.spec(), out.unit_f, out.unit_t);

  nn::Tensor<double> seed(features.shape());
  for (std::size_t c = 0; c < features.channels(); ++c) {
    seed(0, c, static_cast<std::size_t>(out.unit_f),
         static_cast<std::size_t>(out.unit_t)) = 1.0;
  }
  nn::Tensor<double> grad = net.backward_features(seed);

  out.mask.freq = static_cast<long>(probe.freq());
  out.mask.time = static_cast<long>(probe.time());
  out.mask.bits.assign(probe.freq() * probe.time(), 0);
  for (std::size_t c = 0; c < grad.channels(); ++c) {
    const double* g = grad.plane(0, c);
    for (std::size_t i = 0; i < probe.freq() * probe.time(); ++i) {
      if (std::abs(g[i]) > 0.0) out.mask.bits[i] = 1;
    }
  }
  return out;
}

}  // namespace rfcnn::rf
