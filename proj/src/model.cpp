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

#include "rfcnn/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace rfcnn::model {

namespace detail {

using arch::Extent2;

template <class T>
std::span<T> span_of(std::vector<T>& v) {
  return {v.data(), v.size()};
}
template <class T>
std::span<T> span_of(Tensor<T>& t) {
  return t.values();
}

template <class T>
struct ConvLayer {
  nn::ConvParams<T> p;
  Tensor<T> grad_w;
  Extent2 stride, padding;
  Tensor<T> x;

  ConvLayer() = default;
  ConvLayer(int kernel, int stride_, int in_ch, int out_ch, std::mt19937_64& rng)
      : stride{stride_, stride_}, padding{(kernel - 1) / 2, (kernel - 1) / 2} {
    const auto k = static_cast<std::size_t>(kernel);
    p.weights = Tensor<T>({static_cast<std::size_t>(out_ch),
                           static_cast<std::size_t>(in_ch), k, k});
    // He / fan-in scaling.
    const double fan_in = static_cast<double>(in_ch) * kernel * kernel;
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (auto& w : p.weights.values()) w = static_cast<T>(dist(rng));
    grad_w = Tensor<T>(p.weights.shape());
  }

  Tensor<T> forward(Tensor<T> in) {
    x = std::move(in);
    return nn::conv2d_forward(x, p, stride, padding);
  }
  Tensor<T> backward(const Tensor<T>& g) {
    auto r = nn::conv2d_backward(g, x, p, stride, padding, true);
    std::copy(r.grad_w.storage().begin(), r.grad_w.storage().end(), grad_w.data());
    return std::move(r.grad_x);
  }
  void collect(const std::string& name, std::vector<ParamRef<T>>& out) {
    out.push_back({name + ".w", span_of(p.weights), span_of(grad_w)});
  }
  void collect_state(const std::string& name, std::vector<StateRef<T>>& out) {
    out.push_back({name + ".w", p.weights.shape(), span_of(p.weights)});
  }
  std::size_t count() const { return p.weights.size(); }
};

template <class T>
struct BnLayer {
  nn::BnParams<T> p;
  nn::BnCache<T> cache;
  std::vector<T> grad_gamma, grad_beta;

  BnLayer() = default;
  explicit BnLayer(int channels)
      : p(nn::BnParams<T>::make(static_cast<std::size_t>(channels))),
        grad_gamma(static_cast<std::size_t>(channels)),
        grad_beta(static_cast<std::size_t>(channels)) {}

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    return nn::batchnorm_forward(x, p, mode, &cache);
  }
  Tensor<T> backward(const Tensor<T>& g) {
    auto r = nn::batchnorm_backward(g, cache, p);
    std::copy(r.grad_gamma.begin(), r.grad_gamma.end(), grad_gamma.begin());
    std::copy(r.grad_beta.begin(), r.grad_beta.end(), grad_beta.begin());
    return std::move(r.grad_x);
  }
  void collect(const std::string& name, std::vector<ParamRef<T>>& out) {
    out.push_back({name + ".gamma", span_of(p.gamma), span_of(grad_gamma)});
    out.push_back({name + ".beta", span_of(p.beta), span_of(grad_beta)});
  }
  void collect_state(const std::string& name, std::vector<StateRef<T>>& out) {
    const nn::Shape s{1, p.channels(), 1, 1};
    out.push_back({name + ".gamma", s, span_of(p.gamma)});
    out.push_back({name + ".beta", s, span_of(p.beta)});
    out.push_back({name + ".running_mean", s, span_of(p.running_mean)});
    out.push_back({name + ".running_var", s, span_of(p.running_var)});
  }
  std::size_t count() const { return 2 * p.channels(); }
};

template <class T>
struct ReluLayer {
  Tensor<T> y;
  Tensor<T> forward(const Tensor<T>& x) {
    y = nn::relu_forward(x);
    return y;
  }
  Tensor<T> backward(const Tensor<T>& g) { return nn::relu_backward(g, y); }
};

template <class T>
struct PoolLayer {
  PoolKind kind = PoolKind::Max;
  nn::Shape in_shape{};
  std::vector<std::uint32_t> argmax;

  Tensor<T> forward(const Tensor<T>& x) {
    in_shape = x.shape();
    if (kind == PoolKind::Avg) return nn::avgpool2x2_forward(x);
    auto r = nn::maxpool2x2_forward(x);
    argmax = std::move(r.argmax);
    return std::move(r.y);
  }
  Tensor<T> backward(const Tensor<T>& g) {
    if (kind == PoolKind::Avg) return nn::avgpool2x2_backward(g, in_shape);
    return nn::maxpool2x2_backward(g, argmax, in_shape);
  }
};

// Two convolutions of one residual branch. Plain ordering is
// [freq] conv_a -> BN -> ReLU -> [freq] conv_b -> BN; pre-activation ordering
// is BN -> ReLU -> conv_a -> BN -> ReLU -> conv_b.
template <class T>
struct Branch {
  bool preact = false;
  bool freq_aware = false;
  arch::FreqMode freq_mode = arch::FreqMode::Ratio;
  std::optional<BnLayer<T>> pre_bn;
  ReluLayer<T> pre_relu;
  ConvLayer<T> conv_a;
  BnLayer<T> bn_a;
  ReluLayer<T> relu_a;
  ConvLayer<T> conv_b;
  std::optional<BnLayer<T>> bn_b;

  Branch(const arch::NetworkSpec& spec, const arch::BlockSpec& b, int in_ch,
         std::mt19937_64& rng)
      : preact(spec.variant == arch::Variant::PreAct ||
               spec.variant == arch::Variant::ShakeShake),
        freq_aware(spec.freq_aware),
        freq_mode(spec.freq_mode) {
    const int extra = freq_aware ? 1 : 0;
    if (preact) pre_bn.emplace(in_ch);
    conv_a = ConvLayer<T>(b.conv_a_kernel, 1, in_ch + extra, b.width, rng);
    bn_a = BnLayer<T>(b.width);
    conv_b = ConvLayer<T>(b.conv_b_kernel, 1, b.width + extra, b.width, rng);
    if (!preact) bn_b.emplace(b.width);
  }

  Tensor<T> maybe_concat(Tensor<T> x) const {
    return freq_aware ? nn::freq_concat(x, freq_mode) : x;
  }
  Tensor<T> maybe_unconcat(Tensor<T> g) const {
    return freq_aware ? nn::freq_concat_backward(g) : g;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    Tensor<T> h = preact ? pre_relu.forward(pre_bn->forward(x, mode)) : x;
    h = conv_a.forward(maybe_concat(std::move(h)));
    h = relu_a.forward(bn_a.forward(h, mode));
    h = conv_b.forward(maybe_concat(std::move(h)));
    if (bn_b) h = bn_b->forward(h, mode);
    return h;
  }

  Tensor<T> backward(Tensor<T> g) {
    if (bn_b) g = bn_b->backward(g);
    g = maybe_unconcat(conv_b.backward(g));
    g = bn_a.backward(relu_a.backward(g));
    g = maybe_unconcat(conv_a.backward(g));
    if (preact) g = pre_bn->backward(pre_relu.backward(g));
    return g;
  }

  void collect(const std::string& name, std::vector<ParamRef<T>>& out) {
    if (pre_bn) pre_bn->collect(name + ".pre_bn", out);
    conv_a.collect(name + ".conv_a", out);
    bn_a.collect(name + ".bn_a", out);
    conv_b.collect(name + ".conv_b", out);
    if (bn_b) bn_b->collect(name + ".bn_b", out);
  }
  void collect_state(const std::string& name, std::vector<StateRef<T>>& out) {
    if (pre_bn) pre_bn->collect_state(name + ".pre_bn", out);
    conv_a.collect_state(name + ".conv_a", out);
    bn_a.collect_state(name + ".bn_a", out);
    conv_b.collect_state(name + ".conv_b", out);
    if (bn_b) bn_b->collect_state(name + ".bn_b", out);
  }
  std::size_t count() const {
    return (pre_bn ? pre_bn->count() : 0) + conv_a.count() + bn_a.count() +
           conv_b.count() + (bn_b ? bn_b->count() : 0);
  }
};

template <class T>
struct Block {
  arch::BlockSpec spec;
  bool post_relu = false;
  bool pooled = false;
  std::vector<Branch<T>> branches;
  std::optional<ConvLayer<T>> proj;
  std::optional<BnLayer<T>> proj_bn;
  ReluLayer<T> relu;
  PoolLayer<T> pool;
  std::vector<T> alpha;

  Block(const arch::NetworkSpec& net, const arch::BlockSpec& b, int in_ch,
        const ModelOptions& opt, std::mt19937_64& rng)
      : spec(b),
        post_relu(net.variant == arch::Variant::Plain ||
                  net.variant == arch::Variant::FreqAware),
        pooled(b.pooled) {
    const int n_branches = net.variant == arch::Variant::ShakeShake ? 2 : 1;
    for (int i = 0; i < n_branches; ++i) branches.emplace_back(net, b, in_ch, rng);
    if (in_ch != b.width) {
      proj.emplace(1, 1, in_ch, b.width, rng);
      proj_bn.emplace(b.width);
    }
    pool.kind = opt.pool;
  }

  Tensor<T> forward(const Tensor<T>& x, Mode mode, const ModelOptions& opt,
                    arch::ShakeLevel level, std::mt19937_64& rng) {
    Tensor<T> h;
    if (branches.size() == 2) {
      Tensor<T> a = branches[0].forward(x, mode);
      Tensor<T> b = branches[1].forward(x, mode);
      if (mode == Mode::Eval || opt.shake == ShakeMode::Even) {
        alpha.assign(x.batch(), T(0.5));
      } else {
        alpha = nn::draw_shake_coefficients<T>(rng, x.batch(), level);
      }
      h = nn::shake_shake_combine(a, b, alpha);
    } else {
      h = branches[0].forward(x, mode);
    }
    Tensor<T> shortcut = proj ? proj_bn->forward(proj->forward(x), mode) : x;
    h = nn::residual_add(h, shortcut);
    if (post_relu) h = relu.forward(h);
    if (pooled) h = pool.forward(h);
    return h;
  }

  Tensor<T> backward(Tensor<T> g, Mode mode, const ModelOptions& opt,
                     arch::ShakeLevel level, std::mt19937_64& rng) {
    if (pooled) g = pool.backward(g);
    if (post_relu) g = relu.backward(g);
    Tensor<T> gx;
    if (branches.size() == 2) {
      std::vector<T> beta;
      if (mode == Mode::Eval || opt.shake == ShakeMode::Even) {
        beta.assign(g.batch(), T(0.5));
      } else {
        beta = nn::draw_shake_coefficients<T>(rng, g.batch(), level);
      }
      auto [ga, gb] = nn::shake_shake_backward(g, beta);
      gx = branches[0].backward(std::move(ga));
      nn::accumulate(gx, branches[1].backward(std::move(gb)));
    } else {
      gx = branches[0].backward(g);
    }
    if (proj) {
      nn::accumulate(gx, proj->backward(proj_bn->backward(g)));
    } else {
      nn::accumulate(gx, g);
    }
    return gx;
  }

  std::string name() const { return "block" + std::to_string(spec.index); }

  void collect(std::vector<ParamRef<T>>& out) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      branches[i].collect(name() + ".branch" + std::to_string(i), out);
    }
    if (proj) {
      proj->collect(name() + ".proj", out);
      proj_bn->collect(name() + ".proj_bn", out);
    }
  }
  void collect_state(std::vector<StateRef<T>>& out) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      branches[i].collect_state(name() + ".branch" + std::to_string(i), out);
    }
    if (proj) {
      proj->collect_state(name() + ".proj", out);
      proj_bn->collect_state(name() + ".proj_bn", out);
    }
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (const auto& b : branches) n += b.count();
    if (proj) n += proj->count() + proj_bn->count();
    return n;
  }
};

}  // namespace detail

using namespace detail;

template <class T>
struct Network<T>::Impl {
  ConvLayer<T> stem_conv;
  BnLayer<T> stem_bn;
  ReluLayer<T> stem_relu;
  std::vector<Block<T>> blocks;
  std::optional<BnLayer<T>> final_bn;  // pre-activation layouts only
  ReluLayer<T> final_relu;
  nn::Shape features_shape{};
  Tensor<T> pooled;
  Tensor<T> fc_w;
  std::vector<T> fc_b;
  Tensor<T> grad_fc_w;
  std::vector<T> grad_fc_b;
  bool have_features = false;
  bool have_logits = false;
};

template <class T>
Network<T>::Network(Network&&) noexcept = default;
template <class T>
Network<T>& Network<T>::operator=(Network&&) noexcept = default;
template <class T>
Network<T>::~Network() = default;

template <class T>
Network<T> Network<T>::init(const arch::NetworkSpec& spec, std::uint64_t seed,
                            ModelOptions options) {
  arch::validate(spec);
  Network net;
  net.spec_ = spec;
  net.options_ = options;
  net.seed_ = seed;
  net.rng_.seed(seed ^ 0x9e3779b97f4a7c15ULL);
  net.impl_ = std::make_unique<Impl>();
  Impl& m = *net.impl_;

  std::mt19937_64 init_rng(seed);
  m.stem_conv = ConvLayer<T>(spec.input_conv.kernel.f, spec.input_conv.stride.f,
                             spec.in_channels, spec.base_width, init_rng);
  m.stem_conv.padding = spec.input_conv.padding;
  m.stem_conv.stride = spec.input_conv.stride;
  m.stem_bn = BnLayer<T>(spec.base_width);
  int channels = spec.base_width;
  for (const arch::BlockSpec& b : spec.blocks) {
    m.blocks.emplace_back(spec, b, channels, options, init_rng);
    channels = b.width;
  }
  if (spec.variant == arch::Variant::PreAct ||
      spec.variant == arch::Variant::ShakeShake) {
    m.final_bn.emplace(channels);
  }
  const auto in = static_cast<std::size_t>(spec.head.in_features);
  const auto out = static_cast<std::size_t>(spec.head.num_classes);
  m.fc_w = Tensor<T>({out, in, 1, 1});
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& w : m.fc_w.values()) w = static_cast<T>(u(init_rng));
  m.fc_b.assign(out, T(0));
  m.grad_fc_w = Tensor<T>(m.fc_w.shape());
  m.grad_fc_b.assign(out, T(0));
  return net;
}

template <class T>
Tensor<T> Network<T>::forward_features(const Tensor<T>& x) {
  if (x.channels() != static_cast<std::size_t>(spec_.in_channels)) {
    throw nn::ShapeError("network input has " + std::to_string(x.channels()) +
                         " channels, spec expects " +
                         std::to_string(spec_.in_channels));
  }
  Impl& m = *impl_;
  Tensor<T> h = m.stem_conv.forward(x);
  h = m.stem_relu.forward(m.stem_bn.forward(h, mode_));
  for (auto& b : m.blocks) h = b.forward(h, mode_, options_, spec_.shake_level, rng_);
  if (m.final_bn) h = m.final_relu.forward(m.final_bn->forward(h, mode_));
  m.features_shape = h.shape();
  m.have_features = true;
  m.have_logits = false;
  return h;
}

template <class T>
Tensor<T> Network<T>::backward_features(const Tensor<T>& grad_features) {
  Impl& m = *impl_;
  if (!m.have_features) throw std::logic_error("backward called before forward");
  nn::require_shape(grad_features, m.features_shape, "backward_features");
  Tensor<T> g = grad_features;
  if (m.final_bn) g = m.final_bn->backward(m.final_relu.backward(g));
  for (auto it = m.blocks.rbegin(); it != m.blocks.rend(); ++it) {
    g = it->backward(std::move(g), mode_, options_, spec_.shake_level, rng_);
  }
  g = m.stem_bn.backward(m.stem_relu.backward(g));
  g = m.stem_conv.backward(g);
  m.have_features = false;
  m.have_logits = false;
  return g;
}

template <class T>
Tensor<T> Network<T>::forward(const Tensor<T>& x) {
  Tensor<T> features = forward_features(x);
  Impl& m = *impl_;
  m.pooled = nn::global_avg_pool_forward(features);
  Tensor<T> logits = nn::linear_forward(m.pooled, m.fc_w, m.fc_b);
  m.have_logits = true;
  return logits;
}

template <class T>
Tensor<T> Network<T>::backward(const Tensor<T>& grad_logits) {
  Impl& m = *impl_;
  if (!m.have_logits) throw std::logic_error("backward called before forward");
  auto lg = nn::linear_backward(grad_logits, m.pooled, m.fc_w);
  std::copy(lg.grad_w.storage().begin(), lg.grad_w.storage().end(), m.grad_fc_w.data());
  std::copy(lg.grad_b.begin(), lg.grad_b.end(), m.grad_fc_b.begin());
  return backward_features(nn::global_avg_pool_backward(lg.grad_x, m.features_shape));
}

template <class T>
Tensor<T> Network<T>::predict_proba(const Tensor<T>& x) {
  const Mode saved = mode_;
  mode_ = Mode::Eval;
  Tensor<T> p = nn::softmax(forward(x));
  mode_ = saved;
  return p;
}

template <class T>
std::vector<ParamRef<T>> Network<T>::parameters() {
  Impl& m = *impl_;
  std::vector<ParamRef<T>> out;
  m.stem_conv.collect("stem.conv", out);
  m.stem_bn.collect("stem.bn", out);
  for (auto& b : m.blocks) b.collect(out);
  if (m.final_bn) m.final_bn->collect("final_bn", out);
  out.push_back({"fc.w", span_of(m.fc_w), span_of(m.grad_fc_w)});
  out.push_back({"fc.b", span_of(m.fc_b), span_of(m.grad_fc_b)});
  return out;
}

template <class T>
std::vector<StateRef<T>> Network<T>::state() {
  Impl& m = *impl_;
  std::vector<StateRef<T>> out;
  m.stem_conv.collect_state("stem.conv", out);
  m.stem_bn.collect_state("stem.bn", out);
  for (auto& b : m.blocks) b.collect_state(out);
  if (m.final_bn) m.final_bn->collect_state("final_bn", out);
  out.push_back({"fc.w", m.fc_w.shape(), span_of(m.fc_w)});
  out.push_back({"fc.b", {1, m.fc_b.size(), 1, 1}, span_of(m.fc_b)});
  return out;
}

template <class T>
std::size_t Network<T>::parameter_count() const {
  const Impl& m = *impl_;
  std::size_t n = m.stem_conv.count() + m.stem_bn.count();
  for (const auto& b : m.blocks) n += b.count();
  if (m.final_bn) n += m.final_bn->count();
  return n + m.fc_w.size() + m.fc_b.size();
}

template class Network<float>;
template class Network<double>;

}  // namespace rfcnn::model
