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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfcnn/augment.hpp"

namespace rfcnn::aug {

namespace {

void check_pair(const nn::Shape& a, const nn::Shape& b, std::size_t ya, std::size_t yb) {
  if (a != b) {
    throw nn::ShapeError("mixup: input shapes " + nn::shape_string(a) + " and " +
                         nn::shape_string(b) + " differ");
  }
  if (ya != yb) throw nn::ShapeError("mixup: target lengths differ");
}

// Row n of a [N, C, F, T] tensor shifted by s along T.
template <class T>
void roll_sample(const nn::Tensor<T>& x, nn::Tensor<T>& out, std::size_t n, std::size_t s) {
  const std::size_t Tn = x.time();
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t f = 0; f < x.freq(); ++f) {
      const T* src = x.plane(n, c) + f * Tn;
      T* dst = out.plane(n, c) + f * Tn;
      for (std::size_t t = 0; t < Tn; ++t) dst[(t + s) % Tn] = src[t];
    }
  }
}

}  // namespace

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0 && b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double u = ga(rng);
  const double v = gb(rng);
  // Both draws can underflow to zero for tiny alpha.
  if (u + v == 0.0) return std::bernoulli_distribution(a / (a + b))(rng) ? 1.0 : 0.0;
  return u / (u + v);
}

template <class T>
MixupSample<T> mixup_with_lambda(const nn::Tensor<T>& xa, std::span<const double> ya,
                                 const nn::Tensor<T>& xb, std::span<const double> yb,
                                 double lambda) {
  check_pair(xa.shape(), xb.shape(), ya.size(), yb.size());
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda outside [0, 1]");
  MixupSample<T> out;
  out.lambda = lambda;
  out.x = nn::Tensor<T>(xa.shape());
  const auto l = static_cast<T>(lambda);
  const auto r = static_cast<T>(1.0 - lambda);
  for (std::size_t i = 0; i < xa.size(); ++i) out.x[i] = l * xa[i] + r * xb[i];
  out.y.resize(ya.size());
  for (std::size_t k = 0; k < ya.size(); ++k) out.y[k] = lambda * ya[k] + (1.0 - lambda) * yb[k];
  return out;
}

template <class T>
MixupSample<T> mixup(const nn::Tensor<T>& xa, std::span<const double> ya,
                     const nn::Tensor<T>& xb, std::span<const double> yb, double alpha,
                     Rng& rng) {
  check_pair(xa.shape(), xb.shape(), ya.size(), yb.size());
  return mixup_with_lambda(xa, ya, xb, yb, sample_beta(alpha, alpha, rng));
}

template <class T>
std::vector<double> mixup_batch(nn::Tensor<T>& x, std::vector<double>& y, std::size_t classes,
                                double alpha, Rng& rng) {
  const std::size_t N = x.batch();
  if (y.size() != N * classes) throw nn::ShapeError("mixup_batch: target size mismatch");
  std::vector<std::size_t> perm(N);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> lambdas(N);
  for (double& l : lambdas) l = sample_beta(alpha, alpha, rng);

  const nn::Tensor<T> x0 = x;
  const std::vector<double> y0 = y;
  const std::size_t per = x.size() / std::max<std::size_t>(N, 1);
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t j = perm[i];
    const auto l = static_cast<T>(lambdas[i]);
    const auto r = static_cast<T>(1.0 - lambdas[i]);
    const T* a = x0.data() + i * per;
    const T* b = x0.data() + j * per;
    T* dst = x.data() + i * per;
    for (std::size_t e = 0; e < per; ++e) dst[e] = l * a[e] + r * b[e];
    for (std::size_t k = 0; k < classes; ++k) {
      y[i * classes + k] = lambdas[i] * y0[i * classes + k] +
                           (1.0 - lambdas[i]) * y0[j * classes + k];
    }
  }
  return lambdas;
}

template <class T>
nn::Tensor<T> roll_time(const nn::Tensor<T>& x, long shift) {
  nn::Tensor<T> out(x.shape());
  const long Tn = static_cast<long>(x.time());
  if (Tn == 0) return out;
  const auto s = static_cast<std::size_t>(((shift % Tn) + Tn) % Tn);
  for (std::size_t n = 0; n < x.batch(); ++n) roll_sample(x, out, n, s);
  return out;
}

template <class T>
nn::Tensor<T> roll_time(const nn::Tensor<T>& x, Rng& rng) {
  nn::Tensor<T> out(x.shape());
  if (x.time() == 0) return out;
  std::uniform_int_distribution<std::size_t> dist(0, x.time() - 1);
  for (std::size_t n = 0; n < x.batch(); ++n) roll_sample(x, out, n, dist(rng));
  return out;
}

#define RFCNN_INSTANTIATE(T)                                                              \
  template MixupSample<T> mixup(const nn::Tensor<T>&, std::span<const double>,            \
                                const nn::Tensor<T>&, std::span<const double>, double,    \
                                Rng&);                                                    \
  template MixupSample<T> mixup_with_lambda(const nn::Tensor<T>&, std::span<const double>, \
                                            const nn::Tensor<T>&, std::span<const double>, \
                                            double);                                      \
  template std::vector<double> mixup_batch(nn::Tensor<T>&, std::vector<double>&,          \
                                           std::size_t, double, Rng&);                    \
  template nn::Tensor<T> roll_time(const nn::Tensor<T>&, long);                          \
  template nn::Tensor<T> roll_time(const nn::Tensor<T>&, Rng&);

RFCNN_INSTANTIATE(float)
RFCNN_INSTANTIATE(double)

#undef RFCNN_INSTANTIATE

}  // namespace rfcnn::aug
