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

#ifndef RFCNN_TESTS_TEST_UTIL_HPP_
#define RFCNN_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>

#include "rfcnn/tensor.hpp"

namespace rfcnn::testing {

template <class T>
nn::Tensor<T> random_tensor(const nn::Shape& s, std::uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  nn::Tensor<T> t(s);
  for (auto& v : t.values()) v = static_cast<T>(u(rng));
  return t;
}

/// ||a - b|| / max(||a||, ||b||, floor). The floor keeps structurally zero
/// gradients, where both sides are rounding noise, from reading as 100% error.
inline double rel_error(std::span<const double> a, std::span<const double> b,
                        double floor = 1e-3) {
  double d = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(d) / std::max(std::sqrt(std::max(na, nb)), floor);
}

/// Central differences of f with respect to every entry of x (perturbed in place).
inline std::vector<double> numeric_grad(std::span<double> x, const std::function<double()>& f,
                                        double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double fp = f();
    x[i] = keep - h;
    const double fm = f();
    x[i] = keep;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Sum of w * y, the scalar used to probe a backward pass with grad_out = w.
inline double dot(const nn::Tensor<double>& w, const nn::Tensor<double>& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
  return s;
}

}  // namespace rfcnn::testing

#endif  // RFCNN_TESTS_TEST_UTIL_HPP_
