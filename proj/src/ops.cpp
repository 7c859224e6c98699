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

#include "rfcnn/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rfcnn::nn {

namespace {

constexpr std::size_t kPanel = 256;

// out[k][p] = sum_r w[k][r] * col[r][p], accumulated in r order starting
// from zero. Four output rows share each col load; the per-element operation
// sequence is identical to the direct loop.
template <class T>
void gemm_rows(std::size_t K, std::size_t R, std::size_t P, const T* w,
               const T* col, T* out) {
  std::fill(out, out + K * P, T(0));
  for (std::size_t p0 = 0; p0 < P; p0 += kPanel) {
    const std::size_t pn = std::min(kPanel, P - p0);
    std::size_t k = 0;
    for (; k + 4 <= K; k += 4) {
      T* o0 = out + k * P + p0;
      T* o1 = o0 + P;
      T* o2 = o1 + P;
      T* o3 = o2 + P;
      for (std::size_t r = 0; r < R; ++r) {
        const T w0 = w[k * R + r];
        const T w1 = w[(k + 1) * R + r];
        const T w2 = w[(k + 2) * R + r];
        const T w3 = w[(k + 3) * R + r];
        const T* c = col + r * P + p0;
        for (std::size_t p = 0; p < pn; ++p) {
          const T cv = c[p];
          o0[p] += w0 * cv;
          o1[p] += w1 * cv;
          o2[p] += w2 * cv;
          o3[p] += w3 * cv;
        }
      }
    }
    for (; k < K; ++k) {
      T* o = out + k * P + p0;
      for (std::size_t r = 0; r < R; ++r) {
        const T wv = w[k * R + r];
        const T* c = col + r * P + p0;
        for (std::size_t p = 0; p < pn; ++p) o[p] += wv * c[p];
      }
    }
  }
}

template <class T>
T dot(const T* a, const T* b, std::size_t n) {
  T acc[8] = {};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  T s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) +
        ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

template <class T>
void axpy(T a, const T* x, T* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

struct ConvGeom {
  std::size_t C, H, W, K, kf, kt, OH, OW, sf, st, pf, pt;
  std::size_t R() const { return C * kf * kt; }
  std::size_t P() const { return OH * OW; }
  bool pointwise() const {
    return kf == 1 && kt == 1 && sf == 1 && st == 1 && pf == 0 && pt == 0;
  }
};

template <class T>
ConvGeom conv_geom(const Tensor<T>& x, const ConvParams<T>& p, Extent2 stride,
                   Extent2 padding) {
  Shape os = conv2d_output_shape(x.shape(), p.weights.shape(), stride, padding);
  if (p.bias && p.bias->size() != os[1]) {
    throw ShapeError("conv2d: bias length does not match output channels");
  }
  const Shape& ws = p.weights.shape();
  return {x.channels(), x.freq(), x.time(), ws[0], ws[2], ws[3], os[2], os[3],
          static_cast<std::size_t>(stride.f), static_cast<std::size_t>(stride.t),
          static_cast<std::size_t>(padding.f), static_cast<std::size_t>(padding.t)};
}

template <class T>
void im2col(const T* x, const ConvGeom& g, T* col) {
  const std::size_t P = g.P();
  for (std::size_t c = 0; c < g.C; ++c) {
    const T* xp = x + c * g.H * g.W;
    for (std::size_t ky = 0; ky < g.kf; ++ky) {
      for (std::size_t kx = 0; kx < g.kt; ++kx) {
        T* row = col + ((c * g.kf + ky) * g.kt + kx) * P;
        for (std::size_t oy = 0; oy < g.OH; ++oy) {
          const long iy = static_cast<long>(oy * g.sf + ky) - static_cast<long>(g.pf);
          T* out = row + oy * g.OW;
          if (iy < 0 || iy >= static_cast<long>(g.H)) {
            std::fill(out, out + g.OW, T(0));
            continue;
          }
          const T* xr = xp + static_cast<std::size_t>(iy) * g.W;
          for (std::size_t ox = 0; ox < g.OW; ++ox) {
            const long ix = static_cast<long>(ox * g.st + kx) - static_cast<long>(g.pt);
            out[ox] = (ix < 0 || ix >= static_cast<long>(g.W))
                          ? T(0)
                          : xr[static_cast<std::size_t>(ix)];
          }
        }
      }
    }
  }
}

template <class T>
void col2im_add(const T* col, const ConvGeom& g, T* x) {
  const std::size_t P = g.P();
  for (std::size_t c = 0; c < g.C; ++c) {
    T* xp = x + c * g.H * g.W;
    for (std::size_t ky = 0; ky < g.kf; ++ky) {
      for (std::size_t kx = 0; kx < g.kt; ++kx) {
        const T* row = col + ((c * g.kf + ky) * g.kt + kx) * P;
        for (std::size_t oy = 0; oy < g.OH; ++oy) {
          const long iy = static_cast<long>(oy * g.sf + ky) - static_cast<long>(g.pf);
          if (iy < 0 || iy >= static_cast<long>(g.H)) continue;
          T* xr = xp + static_cast<std::size_t>(iy) * g.W;
          const T* in = row + oy * g.OW;
          for (std::size_t ox = 0; ox < g.OW; ++ox) {
            const long ix = static_cast<long>(ox * g.st + kx) - static_cast<long>(g.pt);
            if (ix < 0 || ix >= static_cast<long>(g.W)) continue;
            xr[static_cast<std::size_t>(ix)] += in[ox];
          }
        }
      }
    }
  }
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch " +
                     shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

}  // namespace

Shape conv2d_output_shape(const Shape& x, const Shape& w, Extent2 stride,
                          Extent2 padding) {
  if (w[1] != x[1]) {
    throw ShapeError("conv2d: input has " + std::to_string(x[1]) +
                     " channels, weights expect " + std::to_string(w[1]));
  }
  if (stride.f < 1 || stride.t < 1) throw ShapeError("conv2d: stride must be >= 1");
  if (padding.f < 0 || padding.t < 0) throw ShapeError("conv2d: negative padding");
  const long hf = static_cast<long>(x[2]) + 2L * padding.f - static_cast<long>(w[2]);
  const long ht = static_cast<long>(x[3]) + 2L * padding.t - static_cast<long>(w[3]);
  if (hf < 0 || ht < 0 || x[2] == 0 || x[3] == 0) {
    throw ShapeError("conv2d: zero-sized spatial output for input " +
                     shape_string(x) + " and kernel " + shape_string(w));
  }
  return {x[0], w[0], static_cast<std::size_t>(hf / stride.f + 1),
          static_cast<std::size_t>(ht / stride.t + 1)};
}

template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvParams<T>& p,
                         Extent2 stride, Extent2 padding) {
  const ConvGeom g = conv_geom(x, p, stride, padding);
  Tensor<T> y({x.batch(), g.K, g.OH, g.OW});
  const std::size_t R = g.R(), P = g.P();
  std::vector<T> col(g.pointwise() ? 0 : R * P);
  for (std::size_t n = 0; n < x.batch(); ++n) {
    const T* cp = x.sample(n);
    if (!g.pointwise()) {
      im2col(x.sample(n), g, col.data());
      cp = col.data();
    }
    T* out = y.sample(n);
    gemm_rows(g.K, R, P, p.weights.data(), cp, out);
    if (p.bias) {
      for (std::size_t k = 0; k < g.K; ++k) {
        const T b = (*p.bias)[k];
        for (std::size_t i = 0; i < P; ++i) out[k * P + i] += b;
      }
    }
  }
  return y;
}

template <class T>
Tensor<T> conv2d_forward_direct(const Tensor<T>& x, const ConvParams<T>& p,
                                Extent2 stride, Extent2 padding) {
  const ConvGeom g = conv_geom(x, p, stride, padding);
  Tensor<T> y({x.batch(), g.K, g.OH, g.OW});
  const Tensor<T>& w = p.weights;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t k = 0; k < g.K; ++k) {
      for (std::size_t oy = 0; oy < g.OH; ++oy) {
        for (std::size_t ox = 0; ox < g.OW; ++ox) {
          T acc = T(0);
          for (std::size_t c = 0; c < g.C; ++c) {
            for (std::size_t ky = 0; ky < g.kf; ++ky) {
              for (std::size_t kx = 0; kx < g.kt; ++kx) {
                const long iy = static_cast<long>(oy * g.sf + ky) - static_cast<long>(g.pf);
                const long ix = static_cast<long>(ox * g.st + kx) - static_cast<long>(g.pt);
                const bool inside = iy >= 0 && iy < static_cast<long>(g.H) &&
                                    ix >= 0 && ix < static_cast<long>(g.W);
                const T xv = inside ? x(n, c, static_cast<std::size_t>(iy),
                                        static_cast<std::size_t>(ix))
                                    : T(0);
                acc += w(k, c, ky, kx) * xv;
              }
            }
          }
          if (p.bias) acc += (*p.bias)[k];
          y(n, k, oy, ox) = acc;
        }
      }
    }
  }
  return y;
}

template <class T>
ConvGrads<T> conv2d_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                             const ConvParams<T>& p, Extent2 stride,
                             Extent2 padding, bool need_grad_x) {
  const ConvGeom g = conv_geom(x, p, stride, padding);
  require_shape(grad_out, {x.batch(), g.K, g.OH, g.OW}, "conv2d_backward grad_out");
  const std::size_t R = g.R(), P = g.P(), K = g.K;

  ConvGrads<T> out;
  out.grad_w = Tensor<T>(p.weights.shape());
  out.grad_b.assign(K, T(0));
  if (need_grad_x) out.grad_x = Tensor<T>(x.shape());

  std::vector<T> col(g.pointwise() ? 0 : R * P);
  std::vector<T> gcol(need_grad_x && !g.pointwise() ? R * P : 0);
  const T* w = p.weights.data();
  T* gw = out.grad_w.data();

  for (std::size_t n = 0; n < x.batch(); ++n) {
    const T* cp = x.sample(n);
    if (!g.pointwise()) {
      im2col(x.sample(n), g, col.data());
      cp = col.data();
    }
    const T* go = grad_out.sample(n);
    for (std::size_t k = 0; k < K; ++k) {
      const T* gk = go + k * P;
      for (std::size_t r = 0; r < R; ++r) gw[k * R + r] += dot(gk, cp + r * P, P);
      T s = T(0);
      for (std::size_t i = 0; i < P; ++i) s += gk[i];
      out.grad_b[k] += s;
    }
    if (!need_grad_x) continue;
    T* gc = g.pointwise() ? out.grad_x.sample(n) : gcol.data();
    std::fill(gc, gc + R * P, T(0));
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t k = 0; k < K; ++k) axpy(w[k * R + r], go + k * P, gc + r * P, P);
    }
    if (!g.pointwise()) col2im_add(gc, g, out.grad_x.sample(n));
  }
  if (!p.bias) out.grad_b.clear();
  return out;
}

// --- batch normalization ---------------------------------------------------

template <class T>
Tensor<T> batchnorm_forward(const Tensor<T>& x, BnParams<T>& p, Mode mode,
                            BnCache<T>* cache) {
  const std::size_t N = x.batch(), C = x.channels(), S = x.freq() * x.time();
  if (C != p.channels()) {
    throw ShapeError("batchnorm: input has " + std::to_string(C) +
                     " channels, parameters have " + std::to_string(p.channels()));
  }
  const std::size_t M = N * S;
  if (mode == Mode::Train && M < 2) {
    throw ShapeError("batchnorm: batch*freq*time must be >= 2 in Train mode");
  }
  Tensor<T> y(x.shape());
  Tensor<T> x_hat;
  if (cache) x_hat = Tensor<T>(x.shape());
  std::vector<T> inv_std(C);

  for (std::size_t c = 0; c < C; ++c) {
    double mean, var;
    if (mode == Mode::Train) {
      double s = 0;
      for (std::size_t n = 0; n < N; ++n) {
        const T* xp = x.plane(n, c);
        for (std::size_t i = 0; i < S; ++i) s += xp[i];
      }
      mean = s / static_cast<double>(M);
      double ss = 0;
      for (std::size_t n = 0; n < N; ++n) {
        const T* xp = x.plane(n, c);
        for (std::size_t i = 0; i < S; ++i) {
          const double d = xp[i] - mean;
          ss += d * d;
        }
      }
      var = ss / static_cast<double>(M);
      const double m = p.momentum;
      p.running_mean[c] = static_cast<T>((1 - m) * p.running_mean[c] + m * mean);
      p.running_var[c] = static_cast<T>(
          (1 - m) * p.running_var[c] +
          m * var * static_cast<double>(M) / static_cast<double>(M - 1));
    } else {
      mean = p.running_mean[c];
      var = p.running_var[c];
    }
    const T is = static_cast<T>(1.0 / std::sqrt(var + static_cast<double>(p.eps)));
    const T mu = static_cast<T>(mean);
    inv_std[c] = is;
    const T gm = p.gamma[c], bt = p.beta[c];
    for (std::size_t n = 0; n < N; ++n) {
      const T* xp = x.plane(n, c);
      T* yp = y.plane(n, c);
      T* hp = cache ? x_hat.plane(n, c) : nullptr;
      for (std::size_t i = 0; i < S; ++i) {
        const T h = (xp[i] - mu) * is;
        if (hp) hp[i] = h;
        yp[i] = gm * h + bt;
      }
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

template <class T>
BnGrads<T> batchnorm_backward(const Tensor<T>& grad_out, const BnCache<T>& cache,
                              const BnParams<T>& p) {
  require_shape(grad_out, cache.x_hat.shape(), "batchnorm_backward grad_out");
  const std::size_t N = grad_out.batch(), C = grad_out.channels(),
                    S = grad_out.freq() * grad_out.time();
  const double M = static_cast<double>(N * S);
  BnGrads<T> g;
  g.grad_x = Tensor<T>(grad_out.shape());
  g.grad_gamma.assign(C, T(0));
  g.grad_beta.assign(C, T(0));
  for (std::size_t c = 0; c < C; ++c) {
    double sum_dy = 0, sum_dy_xh = 0;
    for (std::size_t n = 0; n < N; ++n) {
      const T* dy = grad_out.plane(n, c);
      const T* xh = cache.x_hat.plane(n, c);
      for (std::size_t i = 0; i < S; ++i) {
        sum_dy += dy[i];
        sum_dy_xh += static_cast<double>(dy[i]) * xh[i];
      }
    }
    g.grad_gamma[c] = static_cast<T>(sum_dy_xh);
    g.grad_beta[c] = static_cast<T>(sum_dy);
    const T scale = p.gamma[c] * cache.inv_std[c];
    if (cache.mode == Mode::Eval) {
      for (std::size_t n = 0; n < N; ++n) {
        const T* dy = grad_out.plane(n, c);
        T* dx = g.grad_x.plane(n, c);
        for (std::size_t i = 0; i < S; ++i) dx[i] = dy[i] * scale;
      }
      continue;
    }
    const T mean_dy = static_cast<T>(sum_dy / M);
    const T mean_dy_xh = static_cast<T>(sum_dy_xh / M);
    for (std::size_t n = 0; n < N; ++n) {
      const T* dy = grad_out.plane(n, c);
      const T* xh = cache.x_hat.plane(n, c);
      T* dx = g.grad_x.plane(n, c);
      for (std::size_t i = 0; i < S; ++i) {
        dx[i] = scale * (dy[i] - mean_dy - xh[i] * mean_dy_xh);
      }
    }
  }
  return g;
}

// --- elementwise -----------------------------------------------------------

template <class T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const T* xp = x.data();
  T* yp = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) yp[i] = xp[i] > T(0) ? xp[i] : T(0);
  return y;
}

template <class T>
Tensor<T> relu_backward(const Tensor<T>& grad_out, const Tensor<T>& y) {
  require_same_shape(grad_out, y, "relu_backward");
  Tensor<T> g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] > T(0) ? grad_out[i] : T(0);
  return g;
}

// --- pooling ---------------------------------------------------------------

template <class T>
PoolResult<T> maxpool2x2_forward(const Tensor<T>& x) {
  const std::size_t H = x.freq(), W = x.time(), OH = H / 2, OW = W / 2;
  if (OH == 0 || OW == 0) {
    throw ShapeError("maxpool2x2: zero-sized output for input " + shape_string(x.shape()));
  }
  PoolResult<T> r;
  r.y = Tensor<T>({x.batch(), x.channels(), OH, OW});
  r.argmax.resize(r.y.size());
  std::size_t o = 0;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const T* xp = x.plane(n, c);
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox, ++o) {
          std::size_t best = (2 * oy) * W + 2 * ox;
          const std::size_t cand[3] = {best + 1, best + W, best + W + 1};
          for (std::size_t j : cand) {
            if (xp[j] > xp[best]) best = j;
          }
          r.y[o] = xp[best];
          r.argmax[o] = static_cast<std::uint32_t>(best);
        }
      }
    }
  }
  return r;
}

template <class T>
Tensor<T> maxpool2x2_backward(const Tensor<T>& grad_out,
                              const std::vector<std::uint32_t>& argmax,
                              const Shape& in_shape) {
  if (argmax.size() != grad_out.size()) {
    throw ShapeError("maxpool2x2_backward: argmax/grad size mismatch");
  }
  Tensor<T> g(in_shape);
  const std::size_t plane_out = grad_out.freq() * grad_out.time();
  for (std::size_t n = 0; n < grad_out.batch(); ++n) {
    for (std::size_t c = 0; c < grad_out.channels(); ++c) {
      T* gp = g.plane(n, c);
      const std::size_t base = (n * grad_out.channels() + c) * plane_out;
      for (std::size_t i = 0; i < plane_out; ++i) gp[argmax[base + i]] += grad_out[base + i];
    }
  }
  return g;
}

template <class T>
Tensor<T> avgpool2x2_forward(const Tensor<T>& x) {
  const std::size_t H = x.freq(), W = x.time(), OH = H / 2, OW = W / 2;
  if (OH == 0 || OW == 0) {
    throw ShapeError("avgpool2x2: zero-sized output for input " + shape_string(x.shape()));
  }
  Tensor<T> y({x.batch(), x.channels(), OH, OW});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const T* xp = x.plane(n, c);
      T* yp = y.plane(n, c);
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          const std::size_t i = 2 * oy * W + 2 * ox;
          yp[oy * OW + ox] = T(0.25) * ((xp[i] + xp[i + 1]) + (xp[i + W] + xp[i + W + 1]));
        }
      }
    }
  }
  return y;
}

template <class T>
Tensor<T> avgpool2x2_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
  Tensor<T> g(in_shape);
  const std::size_t W = in_shape[3], OH = grad_out.freq(), OW = grad_out.time();
  for (std::size_t n = 0; n < grad_out.batch(); ++n) {
    for (std::size_t c = 0; c < grad_out.channels(); ++c) {
      const T* gp = grad_out.plane(n, c);
      T* xp = g.plane(n, c);
      for (std::size_t oy = 0; oy < OH; ++oy) {
        for (std::size_t ox = 0; ox < OW; ++ox) {
          const T v = T(0.25) * gp[oy * OW + ox];
          const std::size_t i = 2 * oy * W + 2 * ox;
          xp[i] += v;
          xp[i + 1] += v;
          xp[i + W] += v;
          xp[i + W + 1] += v;
        }
      }
    }
  }
  return g;
}

template <class T>
Tensor<T> global_avg_pool_forward(const Tensor<T>& x) {
  const std::size_t S = x.freq() * x.time();
  if (S == 0) throw ShapeError("global_avg_pool: empty spatial extent");
  Tensor<T> y({x.batch(), x.channels(), 1, 1});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t c = 0; c < x.channels(); ++c) {
      const T* xp = x.plane(n, c);
      double s = 0;
      for (std::size_t i = 0; i < S; ++i) s += xp[i];
      y(n, c, 0, 0) = static_cast<T>(s / static_cast<double>(S));
    }
  }
  return y;
}

template <class T>
Tensor<T> global_avg_pool_backward(const Tensor<T>& grad_out, const Shape& in_shape) {
  require_shape(grad_out, {in_shape[0], in_shape[1], 1, 1}, "global_avg_pool_backward");
  Tensor<T> g(in_shape);
  const std::size_t S = in_shape[2] * in_shape[3];
  const T inv = T(1) / static_cast<T>(S);
  for (std::size_t n = 0; n < in_shape[0]; ++n) {
    for (std::size_t c = 0; c < in_shape[1]; ++c) {
      T* gp = g.plane(n, c);
      std::fill(gp, gp + S, grad_out(n, c, 0, 0) * inv);
    }
  }
  return g;
}

// --- linear ----------------------------------------------------------------

template <class T>
Tensor<T> linear_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const std::vector<T>& b) {
  const std::size_t in = w.channels(), out = w.batch();
  if (x.channels() * x.freq() * x.time() != in || b.size() != out) {
    throw ShapeError("linear: input " + shape_string(x.shape()) +
                     " incompatible with weights " + shape_string(w.shape()));
  }
  Tensor<T> y({x.batch(), out, 1, 1});
  for (std::size_t n = 0; n < x.batch(); ++n) {
    const T* xp = x.sample(n);
    for (std::size_t o = 0; o < out; ++o) {
      y(n, o, 0, 0) = dot(w.sample(o), xp, in) + b[o];
    }
  }
  return y;
}

template <class T>
LinearGrads<T> linear_backward(const Tensor<T>& grad_out, const Tensor<T>& x,
                               const Tensor<T>& w) {
  const std::size_t in = w.channels(), out = w.batch();
  require_shape(grad_out, {x.batch(), out, 1, 1}, "linear_backward grad_out");
  LinearGrads<T> g;
  g.grad_x = Tensor<T>(x.shape());
  g.grad_w = Tensor<T>(w.shape());
  g.grad_b.assign(out, T(0));
  for (std::size_t n = 0; n < x.batch(); ++n) {
    const T* xp = x.sample(n);
    T* gx = g.grad_x.sample(n);
    for (std::size_t o = 0; o < out; ++o) {
      const T go = grad_out(n, o, 0, 0);
      g.grad_b[o] += go;
      axpy(go, xp, g.grad_w.sample(o), in);
      axpy(go, w.sample(o), gx, in);
    }
  }
  return g;
}

// --- frequency channel -----------------------------------------------------

double freq_value(std::size_t f, std::size_t F, FreqMode mode) {
  if (mode == FreqMode::Ratio) return static_cast<double>(f) / static_cast<double>(F);
  if (F <= 1) return 0.0;
  return 2.0 * static_cast<double>(f) / static_cast<double>(F - 1) - 1.0;
}

template <class T>
Tensor<T> freq_concat(const Tensor<T>& x, FreqMode mode) {
  const std::size_t N = x.batch(), C = x.channels(), F = x.freq(), Tm = x.time();
  if (F == 0) throw ShapeError("freq_concat: empty frequency axis");
  Tensor<T> y({N, C + 1, F, Tm});
  const std::size_t plane = F * Tm;
  std::vector<T> channel(plane);
  for (std::size_t f = 0; f < F; ++f) {
    std::fill_n(channel.begin() + static_cast<long>(f * Tm), Tm,
                static_cast<T>(freq_value(f, F, mode)));
  }
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(x.sample(n), C * plane, y.sample(n));
    std::copy(channel.begin(), channel.end(), y.plane(n, C));
  }
  return y;
}

template <class T>
Tensor<T> freq_concat_backward(const Tensor<T>& grad_out) {
  const std::size_t N = grad_out.batch(), C = grad_out.channels() - 1;
  const std::size_t plane = grad_out.freq() * grad_out.time();
  Tensor<T> g({N, C, grad_out.freq(), grad_out.time()});
  for (std::size_t n = 0; n < N; ++n) {
    std::copy_n(grad_out.sample(n), C * plane, g.sample(n));
  }
  return g;
}

// --- residual combination --------------------------------------------------

template <class T>
std::vector<T> draw_shake_coefficients(std::mt19937_64& rng, std::size_t batch,
                                       ShakeLevel level) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<T> c(batch);
  if (level == ShakeLevel::PerBatch) {
    std::fill(c.begin(), c.end(), static_cast<T>(u(rng)));
  } else {
    for (auto& v : c) v = static_cast<T>(u(rng));
  }
  return c;
}

template <class T>
Tensor<T> shake_shake_combine(const Tensor<T>& a, const Tensor<T>& b,
                              const std::vector<T>& alpha) {
  require_same_shape(a, b, "shake_shake_combine");
  if (alpha.size() != a.batch()) {
    throw ShapeError("shake_shake_combine: need one coefficient per sample");
  }
  Tensor<T> y(a.shape());
  const std::size_t S = a.channels() * a.freq() * a.time();
  for (std::size_t n = 0; n < a.batch(); ++n) {
    const T wa = alpha[n], wb = T(1) - alpha[n];
    const T* ap = a.sample(n);
    const T* bp = b.sample(n);
    T* yp = y.sample(n);
    for (std::size_t i = 0; i < S; ++i) yp[i] = wa * ap[i] + wb * bp[i];
  }
  return y;
}

template <class T>
Tensor<T> shake_shake_combine(const Tensor<T>& a, const Tensor<T>& b, Mode mode,
                              std::mt19937_64& rng, ShakeLevel level) {
  if (mode == Mode::Eval) {
    return shake_shake_combine(a, b, std::vector<T>(a.batch(), T(0.5)));
  }
  return shake_shake_combine(a, b, draw_shake_coefficients<T>(rng, a.batch(), level));
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> shake_shake_backward(const Tensor<T>& grad_out,
                                                     const std::vector<T>& beta) {
  if (beta.size() != grad_out.batch()) {
    throw ShapeError("shake_shake_backward: need one coefficient per sample");
  }
  Tensor<T> ga(grad_out.shape()), gb(grad_out.shape());
  const std::size_t S = grad_out.channels() * grad_out.freq() * grad_out.time();
  for (std::size_t n = 0; n < grad_out.batch(); ++n) {
    const T wa = beta[n], wb = T(1) - beta[n];
    const T* g = grad_out.sample(n);
    T* pa = ga.sample(n);
    T* pb = gb.sample(n);
    for (std::size_t i = 0; i < S; ++i) {
      pa[i] = wa * g[i];
      pb[i] = wb * g[i];
    }
  }
  return {std::move(ga), std::move(gb)};
}

template <class T>
Tensor<T> residual_add(const Tensor<T>& branch, const Tensor<T>& shortcut) {
  require_same_shape(branch, shortcut, "residual_add");
  Tensor<T> y(branch.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = branch[i] + shortcut[i];
  return y;
}

template <class T>
void accumulate(Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "accumulate");
  T* ap = a.data();
  const T* bp = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) ap[i] += bp[i];
}

template <class T>
Tensor<T> softmax(const Tensor<T>& logits) {
  if (logits.freq() != 1 || logits.time() != 1) {
    throw ShapeError("softmax: expected [n, k, 1, 1], got " + shape_string(logits.shape()));
  }
  Tensor<T> p(logits.shape());
  const std::size_t K = logits.channels();
  for (std::size_t n = 0; n < logits.batch(); ++n) {
    const T* z = logits.sample(n);
    T* out = p.sample(n);
    const T m = *std::max_element(z, z + K);
    double s = 0;
    for (std::size_t k = 0; k < K; ++k) s += std::exp(static_cast<double>(z[k] - m));
    for (std::size_t k = 0; k < K; ++k) {
      out[k] = static_cast<T>(std::exp(static_cast<double>(z[k] - m)) / s);
    }
  }
  return p;
}

#define RFCNN_INSTANTIATE_OPS(T)                                                  \
  template Tensor<T> conv2d_forward(const Tensor<T>&, const ConvParams<T>&,       \
                                    Extent2, Extent2);                            \
  template Tensor<T> conv2d_forward_direct(const Tensor<T>&, const ConvParams<T>&, \
                                           Extent2, Extent2);                     \
  template ConvGrads<T> conv2d_backward(const Tensor<T>&, const Tensor<T>&,       \
                                        const ConvParams<T>&, Extent2, Extent2,   \
                                        bool);                                    \
  template Tensor<T> batchnorm_forward(const Tensor<T>&, BnParams<T>&, Mode,      \
                                       BnCache<T>*);                              \
  template BnGrads<T> batchnorm_backward(const Tensor<T>&, const BnCache<T>&,     \
                                         const BnParams<T>&);                     \
  template Tensor<T> relu_forward(const Tensor<T>&);                              \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);           \
  template PoolResult<T> maxpool2x2_forward(const Tensor<T>&);                    \
  template Tensor<T> maxpool2x2_backward(const Tensor<T>&,                        \
                                         const std::vector<std::uint32_t>&,       \
                                         const Shape&);                           \
  template Tensor<T> avgpool2x2_forward(const Tensor<T>&);                        \
  template Tensor<T> avgpool2x2_backward(const Tensor<T>&, const Shape&);         \
  template Tensor<T> global_avg_pool_forward(const Tensor<T>&);                   \
  template Tensor<T> global_avg_pool_backward(const Tensor<T>&, const Shape&);    \
  template Tensor<T> linear_forward(const Tensor<T>&, const Tensor<T>&,           \
                                    const std::vector<T>&);                       \
  template LinearGrads<T> linear_backward(const Tensor<T>&, const Tensor<T>&,     \
                                          const Tensor<T>&);                      \
  template Tensor<T> freq_concat(const Tensor<T>&, FreqMode);                     \
  template Tensor<T> freq_concat_backward(const Tensor<T>&);                      \
  template std::vector<T> draw_shake_coefficients(std::mt19937_64&, std::size_t,  \
                                                  ShakeLevel);                    \
  template Tensor<T> shake_shake_combine(const Tensor<T>&, const Tensor<T>&,      \
                                         const std::vector<T>&);                  \
  template Tensor<T> shake_shake_combine(const Tensor<T>&, const Tensor<T>&, Mode, \
                                         std::mt19937_64&, ShakeLevel);           \
  template std::pair<Tensor<T>, Tensor<T>> shake_shake_backward(                  \
      const Tensor<T>&, const std::vector<T>&);                                   \
  template Tensor<T> residual_add(const Tensor<T>&, const Tensor<T>&);            \
  template void accumulate(Tensor<T>&, const Tensor<T>&);                         \
  template Tensor<T> softmax(const Tensor<T>&);

RFCNN_INSTANTIATE_OPS(float)
RFCNN_INSTANTIATE_OPS(double)

#undef RFCNN_INSTANTIATE_OPS

}  // namespace rfcnn::nn
