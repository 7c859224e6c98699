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

#include "rfcnn/archspec.hpp"

#include <charconv>
#include <iomanip>
#include <map>
#include <sstream>

namespace rfcnn::arch {

namespace {

constexpr std::string_view kSpecHeader = "rfcnn-archspec 1";

int block_width_multiplier(int index) {
  if (index <= 4) return 1;
  if (index <= 8) return 2;
  return 4;
}

bool block_is_pooled(int index) {
  return index == 1 || index == 2 || index == 4;
}

bool is_preact_layout(Variant v) {
  return v == Variant::PreAct || v == Variant::ShakeShake;
}

}  // namespace

LayerSpec conv_layer(int kernel, int stride, int in_channels,
                     int out_channels) {
  LayerSpec l;
  l.kind = LayerKind::Conv;
  l.kernel = {kernel, kernel};
  l.stride = {stride, stride};
  l.padding = {(kernel - 1) / 2, (kernel - 1) / 2};
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  return l;
}

LayerSpec maxpool_layer(int channels) {
  LayerSpec l;
  l.kind = LayerKind::MaxPool;
  l.kernel = {2, 2};
  l.stride = {2, 2};
  l.in_channels = channels;
  l.out_channels = channels;
  return l;
}

int NetworkSpec::block_in_channels(int index) const {
  if (index <= 1) return base_width;
  return blocks.at(static_cast<size_t>(index - 2)).width;
}

std::array<int, kNumControlledKernels> rho_to_kernels(Rho rho) {
  std::array<int, kNumControlledKernels> x{};
  for (int k = 1; k <= kNumControlledKernels; ++k) {
    x[static_cast<size_t>(k - 1)] = k <= rho.value() ? 3 : 1;
  }
  return x;
}

NetworkSpec make_network(Rho rho, Variant variant, int num_classes,
                         int base_width, int in_channels) {
  if (base_width < 1) throw SpecError("base_width must be >= 1");
  if (num_classes < 2) throw SpecError("num_classes must be >= 2");
  if (in_channels < 1) throw SpecError("in_channels must be >= 1");

  NetworkSpec spec;
  spec.num_classes = num_classes;
  spec.in_channels = in_channels;
  spec.base_width = base_width;
  spec.variant = variant;
  spec.freq_aware = variant == Variant::FreqAware;
  spec.x = rho_to_kernels(rho);
  spec.input_conv = conv_layer(5, 2, in_channels, base_width);

  for (int i = 1; i <= kNumBlocks; ++i) {
    BlockSpec b;
    b.index = i;
    if (i == 1) {
      b.conv_a_kernel = 3;
      b.conv_b_kernel = 1;
    } else {
      // Block i uses x_{2i-3} and x_{2i-2} (1-based).
      b.conv_a_kernel = spec.x[static_cast<size_t>(2 * i - 4)];
      b.conv_b_kernel = spec.x[static_cast<size_t>(2 * i - 3)];
    }
    b.width = base_width * block_width_multiplier(i);
    b.pooled = block_is_pooled(i);
    b.variant = variant;
    spec.blocks.push_back(b);
  }
  spec.head = {spec.blocks.back().width, num_classes};
  return spec;
}

void validate(const NetworkSpec& spec) {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw SpecError("field '" + field + "': " + msg);
  };
  if (spec.num_classes < 2) fail("num_classes", "must be >= 2");
  if (spec.in_channels < 1) fail("in_channels", "must be >= 1");
  if (spec.base_width < 1) fail("base_width", "must be >= 1");
  if (spec.freq_aware != (spec.variant == Variant::FreqAware)) {
    fail("freq_aware", "must be set exactly for the FreqAware variant");
  }
  for (size_t k = 0; k < spec.x.size(); ++k) {
    if (spec.x[k] != 1 && spec.x[k] != 3) {
      fail("x", "kernel x_" + std::to_string(k + 1) + " = " +
                    std::to_string(spec.x[k]) + " not in {1,3}");
    }
  }
  const LayerSpec& in = spec.input_conv;
  if (in.kind != LayerKind::Conv || in.kernel != Extent2{5, 5} ||
      in.stride != Extent2{2, 2}) {
    fail("input_conv", "must be a 5x5 stride-2 convolution");
  }
  if (in.padding != Extent2{2, 2}) fail("input_conv", "padding must be 2");
  if (in.in_channels != spec.in_channels || in.out_channels != spec.base_width) {
    fail("input_conv", "channels must be in_channels -> base_width");
  }
  if (spec.blocks.size() != static_cast<size_t>(kNumBlocks)) {
    fail("blocks", "expected 12 blocks, got " +
                       std::to_string(spec.blocks.size()));
  }
  for (int i = 1; i <= kNumBlocks; ++i) {
    const BlockSpec& b = spec.blocks[static_cast<size_t>(i - 1)];
    const std::string field = "block " + std::to_string(i);
    if (b.index != i) fail(field, "index out of order");
    int want_a = i == 1 ? 3 : spec.x[static_cast<size_t>(2 * i - 4)];
    int want_b = i == 1 ? 1 : spec.x[static_cast<size_t>(2 * i - 3)];
    if (b.conv_a_kernel != want_a || b.conv_b_kernel != want_b) {
      fail(field, "kernels do not match x");
    }
    if (b.width != spec.base_width * block_width_multiplier(i)) {
      fail(field, "width breaks the 1:2:4 group pattern");
    }
    if (b.pooled != block_is_pooled(i)) {
      fail(field, "pooling must follow blocks 1, 2 and 4 only");
    }
    if (b.variant != spec.variant) fail(field, "variant differs from network");
  }
  if (spec.head.in_features != spec.blocks.back().width ||
      spec.head.num_classes != spec.num_classes) {
    fail("head", "must map the last block width to num_classes");
  }
}

std::vector<LayerSpec> layer_sequence(const NetworkSpec& spec) {
  std::vector<LayerSpec> seq;
  auto simple = [](LayerKind kind, int channels) {
    LayerSpec l;
    l.kind = kind;
    l.in_channels = channels;
    l.out_channels = channels;
    return l;
  };
  auto freq_concat = [](int channels) {
    LayerSpec l;
    l.kind = LayerKind::FreqConcat;
    l.in_channels = channels;
    l.out_channels = channels + 1;
    return l;
  };

  seq.push_back(spec.input_conv);
  seq.push_back(simple(LayerKind::BatchNorm, spec.base_width));
  seq.push_back(simple(LayerKind::ReLU, spec.base_width));

  const bool preact = is_preact_layout(spec.variant);
  const int extra = spec.freq_aware ? 1 : 0;
  int channels = spec.base_width;
  for (const BlockSpec& b : spec.blocks) {
    if (preact) {
      seq.push_back(simple(LayerKind::BatchNorm, channels));
      seq.push_back(simple(LayerKind::ReLU, channels));
    }
    if (spec.freq_aware) seq.push_back(freq_concat(channels));
    seq.push_back(conv_layer(b.conv_a_kernel, 1, channels + extra, b.width));
    seq.push_back(simple(LayerKind::BatchNorm, b.width));
    seq.push_back(simple(LayerKind::ReLU, b.width));
    if (spec.freq_aware) seq.push_back(freq_concat(b.width));
    seq.push_back(conv_layer(b.conv_b_kernel, 1, b.width + extra, b.width));
    if (!preact) {
      seq.push_back(simple(LayerKind::BatchNorm, b.width));
      seq.push_back(simple(LayerKind::ReLU, b.width));
    }
    if (b.pooled) seq.push_back(maxpool_layer(b.width));
    channels = b.width;
  }
  if (preact) {
    seq.push_back(simple(LayerKind::BatchNorm, channels));
    seq.push_back(simple(LayerKind::ReLU, channels));
  }
  seq.push_back(simple(LayerKind::GlobalAvgPool, channels));
  LayerSpec fc;
  fc.kind = LayerKind::Linear;
  fc.in_channels = spec.head.in_features;
  fc.out_channels = spec.head.num_classes;
  seq.push_back(fc);
  return seq;
}

// ---------------------------------------------------------------------------
// Names

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Plain: return "Plain";
    case Variant::PreAct: return "PreAct";
    case Variant::ShakeShake: return "ShakeShake";
    case Variant::FreqAware: return "FreqAware";
  }
  return "?";
}

std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "Conv";
    case LayerKind::MaxPool: return "MaxPool";
    case LayerKind::BatchNorm: return "BatchNorm";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::FreqConcat: return "FreqConcat";
    case LayerKind::GlobalAvgPool: return "GlobalAvgPool";
    case LayerKind::Linear: return "Linear";
  }
  return "?";
}

std::string_view to_string(FreqMode m) {
  return m == FreqMode::Ratio ? "ratio" : "normalized";
}

std::string_view to_string(ShakeLevel l) {
  return l == ShakeLevel::PerSample ? "per-sample" : "per-batch";
}

Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::Plain, Variant::PreAct, Variant::ShakeShake,
                    Variant::FreqAware}) {
    if (s == to_string(v)) return v;
  }
  // Lower-case aliases for the command line.
  if (s == "plain" || s == "resnet") return Variant::Plain;
  if (s == "preact") return Variant::PreAct;
  if (s == "shakeshake" || s == "shake-shake") return Variant::ShakeShake;
  if (s == "freqaware" || s == "faresnet" || s == "freq-aware") {
    return Variant::FreqAware;
  }
  throw SpecError("unknown variant '" + std::string(s) + "'");
}

FreqMode parse_freq_mode(std::string_view s) {
  if (s == "ratio") return FreqMode::Ratio;
  if (s == "normalized") return FreqMode::Normalized;
  throw SpecError("unknown freq mode '" + std::string(s) + "'");
}

ShakeLevel parse_shake_level(std::string_view s) {
  if (s == "per-sample") return ShakeLevel::PerSample;
  if (s == "per-batch") return ShakeLevel::PerBatch;
  throw SpecError("unknown shake level '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Text format

std::string serialize_spec(const NetworkSpec& spec) {
  std::ostringstream os;
  os << kSpecHeader << '\n';
  os << "variant " << to_string(spec.variant) << '\n';
  os << "num_classes " << spec.num_classes << '\n';
  os << "in_channels " << spec.in_channels << '\n';
  os << "base_width " << spec.base_width << '\n';
  os << "freq_aware " << (spec.freq_aware ? 1 : 0) << '\n';
  os << "freq_mode " << to_string(spec.freq_mode) << '\n';
  os << "shake_level " << to_string(spec.shake_level) << '\n';
  os << "x";
  for (int k : spec.x) os << ' ' << k;
  os << '\n';
  const LayerSpec& c = spec.input_conv;
  os << "input_conv " << c.kernel.f << ' ' << c.kernel.t << ' ' << c.stride.f
     << ' ' << c.stride.t << ' ' << c.padding.f << ' ' << c.padding.t << ' '
     << c.in_channels << ' ' << c.out_channels << '\n';
  for (const BlockSpec& b : spec.blocks) {
    os << "block " << b.index << ' ' << b.conv_a_kernel << ' '
       << b.conv_b_kernel << ' ' << b.width << ' ' << (b.pooled ? 1 : 0) << ' '
       << to_string(b.variant) << '\n';
  }
  os << "head " << spec.head.in_features << ' ' << spec.head.num_classes
     << '\n';
  os << "end\n";
  return os.str();
}

namespace {

struct LineReader {
  int line_no = 0;
  std::vector<std::string> tokens;

  [[noreturn]] void fail(std::string_view field, const std::string& msg) const {
    throw SpecError("line " + std::to_string(line_no) + ": field '" +
                    std::string(field) + "': " + msg);
  }

  void expect_args(std::string_view field, size_t n) const {
    if (tokens.size() - 1 != n) {
      fail(field, "expected " + std::to_string(n) + " value(s), got " +
                      std::to_string(tokens.size() - 1));
    }
  }

  int integer(size_t i, std::string_view field) const {
    const std::string& s = tokens.at(i);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      fail(field, "'" + s + "' is not an integer");
    }
    return v;
  }
};

}  // namespace

NetworkSpec parse_spec(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  LineReader rd;
  NetworkSpec spec;
  spec.blocks.clear();
  bool saw_header = false;
  bool saw_end = false;
  std::map<std::string, int> seen;

  while (std::getline(is, line)) {
    ++rd.line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kSpecHeader) {
        rd.fail("header", "expected '" + std::string(kSpecHeader) + "'");
      }
      saw_header = true;
      continue;
    }
    if (saw_end) rd.fail("end", "content after 'end'");
    std::istringstream ls(line);
    rd.tokens.clear();
    for (std::string tok; ls >> tok;) rd.tokens.push_back(tok);
    if (rd.tokens.empty()) continue;
    const std::string key = rd.tokens[0];
    if (key != "block" && seen[key]++ > 0) rd.fail(key, "duplicate field");

    try {
      if (key == "variant") {
        rd.expect_args(key, 1);
        spec.variant = parse_variant(rd.tokens[1]);
      } else if (key == "num_classes") {
        rd.expect_args(key, 1);
        spec.num_classes = rd.integer(1, key);
      } else if (key == "in_channels") {
        rd.expect_args(key, 1);
        spec.in_channels = rd.integer(1, key);
      } else if (key == "base_width") {
        rd.expect_args(key, 1);
        spec.base_width = rd.integer(1, key);
      } else if (key == "freq_aware") {
        rd.expect_args(key, 1);
        int v = rd.integer(1, key);
        if (v != 0 && v != 1) rd.fail(key, "must be 0 or 1");
        spec.freq_aware = v == 1;
      } else if (key == "freq_mode") {
        rd.expect_args(key, 1);
        spec.freq_mode = parse_freq_mode(rd.tokens[1]);
      } else if (key == "shake_level") {
        rd.expect_args(key, 1);
        spec.shake_level = parse_shake_level(rd.tokens[1]);
      } else if (key == "x") {
        rd.expect_args(key, kNumControlledKernels);
        for (int k = 0; k < kNumControlledKernels; ++k) {
          int v = rd.integer(static_cast<size_t>(k + 1), key);
          if (v != 1 && v != 3) {
            rd.fail(key, "kernel x_" + std::to_string(k + 1) + " = " +
                             std::to_string(v) + " not in {1,3}");
          }
          spec.x[static_cast<size_t>(k)] = v;
        }
      } else if (key == "input_conv") {
        rd.expect_args(key, 8);
        LayerSpec& c = spec.input_conv;
        c.kind = LayerKind::Conv;
        c.kernel = {rd.integer(1, key), rd.integer(2, key)};
        c.stride = {rd.integer(3, key), rd.integer(4, key)};
        c.padding = {rd.integer(5, key), rd.integer(6, key)};
        c.in_channels = rd.integer(7, key);
        c.out_channels = rd.integer(8, key);
      } else if (key == "block") {
        rd.expect_args(key, 6);
        BlockSpec b;
        b.index = rd.integer(1, key);
        b.conv_a_kernel = rd.integer(2, key);
        b.conv_b_kernel = rd.integer(3, key);
        b.width = rd.integer(4, key);
        int pooled = rd.integer(5, key);
        if (pooled != 0 && pooled != 1) rd.fail(key, "pooled must be 0 or 1");
        b.pooled = pooled == 1;
        b.variant = parse_variant(rd.tokens[6]);
        spec.blocks.push_back(b);
      } else if (key == "head") {
        rd.expect_args(key, 2);
        spec.head = {rd.integer(1, key), rd.integer(2, key)};
      } else if (key == "end") {
        rd.expect_args(key, 0);
        saw_end = true;
      } else {
        rd.fail(key, "unknown field");
      }
    } catch (const SpecError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      rd.fail(key, msg);
    }
  }
  if (!saw_header) throw SpecError("line 1: field 'header': missing header");
  if (!saw_end) throw SpecError("line " + std::to_string(rd.line_no) +
                                ": field 'end': missing terminator");
  for (const char* required : {"variant", "num_classes", "in_channels",
                               "base_width", "freq_aware", "x", "input_conv",
                               "head"}) {
    if (seen.find(required) == seen.end()) {
      throw SpecError(std::string("field '") + required + "': missing");
    }
  }
  validate(spec);
  return spec;
}

std::string format_table(const NetworkSpec& spec) {
  std::ostringstream os;
  os << "variant=" << to_string(spec.variant)
     << " base_width=" << spec.base_width
     << " in_channels=" << spec.in_channels
     << " num_classes=" << spec.num_classes << '\n';
  os << "  RB | config                 | width\n";
  os << "  ---+------------------------+------\n";
  const LayerSpec& c = spec.input_conv;
  os << "     | input " << c.kernel.f << 'x' << c.kernel.t << " stride=" << c.stride.f
     << "     | " << c.out_channels << '\n';
  for (const BlockSpec& b : spec.blocks) {
    std::ostringstream cfg;
    cfg << b.conv_a_kernel << 'x' << b.conv_a_kernel << ", " << b.conv_b_kernel
        << 'x' << b.conv_b_kernel << (b.pooled ? ", P" : "");
    os << "  " << std::setw(2) << b.index << " | " << std::left
       << std::setw(22) << cfg.str() << std::right << " | " << b.width << '\n';
  }
  os << "     | global avg pool, fc -> " << spec.num_classes << '\n';
  if (spec.freq_aware) {
    os << "  (frequency channel concatenated before every block conv, mode="
       << to_string(spec.freq_mode) << ")\n";
  }
  return os.str();
}

}  // namespace rfcnn::arch
