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

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "rfcnn/config.hpp"

namespace rfcnn::cfg {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class I>
I to_int(std::string_view key, std::string_view v) {
  I out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError("key '" + std::string(key) + "': expected an integer, got '" +
                      std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(std::string(v), &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + std::string(key) + "': expected a number, got '" +
                    std::string(v) + "'");
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + std::string(key) + "': expected true/false, got '" +
                    std::string(v) + "'");
}

std::string fmt_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", d);
  return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

template <class T>
std::string join(const std::vector<T>& v, auto&& fn) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + std::string(fn(x));
  return s;
}

struct Entry {
  std::string key;
  std::function<void(Config&, std::string_view key, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

#define INT_FIELD(K, F, Type)                                                   \
  Entry {                                                                       \
    K, [](Config& c, std::string_view k, std::string_view v) {                  \
      c.F = to_int<Type>(k, v);                                                 \
    },                                                                          \
        [](const Config& c) { return std::to_string(c.F); }                     \
  }
#define DOUBLE_FIELD(K, F)                                                      \
  Entry {                                                                       \
    K, [](Config& c, std::string_view k, std::string_view v) {                  \
      c.F = to_double(k, v);                                                    \
    },                                                                          \
        [](const Config& c) { return fmt_double(c.F); }                         \
  }
#define BOOL_FIELD(K, F)                                                        \
  Entry {                                                                       \
    K, [](Config& c, std::string_view k, std::string_view v) {                  \
      c.F = to_bool(k, v);                                                      \
    },                                                                          \
        [](const Config& c) { return fmt_bool(c.F); }                           \
  }

const std::vector<Entry>& table() {
  static const std::vector<Entry> t = {
      INT_FIELD("model.rho", rho, int),
      {"model.variant",
       [](Config& c, std::string_view, std::string_view v) { c.variant = arch::parse_variant(v); },
       [](const Config& c) { return std::string(arch::to_string(c.variant)); }},
      INT_FIELD("model.base_width", base_width, int),
      {"model.freq_mode",
       [](Config& c, std::string_view, std::string_view v) {
         c.freq_mode = arch::parse_freq_mode(v);
       },
       [](const Config& c) { return std::string(arch::to_string(c.freq_mode)); }},
      {"model.shake_level",
       [](Config& c, std::string_view, std::string_view v) {
         c.shake_level = arch::parse_shake_level(v);
       },
       [](const Config& c) { return std::string(arch::to_string(c.shake_level)); }},
      INT_FIELD("dsp.sample_rate", dsp.sample_rate, int),
      INT_FIELD("dsp.window", dsp.window, std::size_t),
      INT_FIELD("dsp.hop", dsp.hop, std::size_t),
      INT_FIELD("dsp.mels", dsp.n_mels, std::size_t),
      DOUBLE_FIELD("dsp.fmin", dsp.fmin),
      DOUBLE_FIELD("dsp.fmax", dsp.fmax),
      {"dsp.mel_norm",
       [](Config& c, std::string_view k, std::string_view v) {
         if (v == "slaney") c.dsp.mel_norm = dsp::MelNorm::Slaney;
         else if (v == "peak") c.dsp.mel_norm = dsp::MelNorm::Peak;
         else if (v == "none") c.dsp.mel_norm = dsp::MelNorm::None;
         else throw ConfigError("key '" + std::string(k) + "': expected slaney, peak or none");
       },
       [](const Config& c) {
         return std::string(c.dsp.mel_norm == dsp::MelNorm::Slaney ? "slaney"
                            : c.dsp.mel_norm == dsp::MelNorm::Peak ? "peak"
                                                                   : "none");
       }},
      BOOL_FIELD("dsp.stereo", dsp.stereo),
      {"norm.mode",
       [](Config& c, std::string_view k, std::string_view v) {
         if (v == "per-bin") c.norm = dsp::NormMode::PerBin;
         else if (v == "global") c.norm = dsp::NormMode::Global;
         else if (v == "none") c.norm = dsp::NormMode::None;
         else throw ConfigError("key '" + std::string(k) + "': expected per-bin, global or none");
       },
       [](const Config& c) {
         return std::string(c.norm == dsp::NormMode::PerBin   ? "per-bin"
                            : c.norm == dsp::NormMode::Global ? "global"
                                                              : "none");
       }},
      BOOL_FIELD("dsp.allow_upsampling", dsp.allow_upsampling),
      INT_FIELD("train.epochs", epochs, int),
      INT_FIELD("train.batch_size", batch_size, std::size_t),
      DOUBLE_FIELD("train.lr_start", lr_start),
      DOUBLE_FIELD("train.lr_end", lr_end),
      INT_FIELD("train.decay_start", decay_start, int),
      INT_FIELD("train.decay_end", decay_end, int),
      INT_FIELD("train.seed", seed, std::uint64_t),
      INT_FIELD("train.keep_last", keep_last, int),
      INT_FIELD("train.last_k", last_k, int),
      INT_FIELD("train.runs", runs, int),
      BOOL_FIELD("train.eval_train", eval_train),
      BOOL_FIELD("mixup.enabled", mixup),
      DOUBLE_FIELD("mixup.alpha", mixup_alpha),
      BOOL_FIELD("roll.enabled", roll),
      {"grid.rhos",
       [](Config& c, std::string_view, std::string_view v) { c.grid_rhos = parse_int_list(v); },
       [](const Config& c) {
         return join(c.grid_rhos, [](int r) { return std::to_string(r); });
       }},
      {"grid.variants",
       [](Config& c, std::string_view, std::string_view v) {
         c.grid_variants.clear();
         std::string s(v);
         std::istringstream is(s);
         std::string tok;
         while (std::getline(is, tok, ',')) {
           c.grid_variants.push_back(arch::parse_variant(trim(tok)));
         }
       },
       [](const Config& c) {
         return join(c.grid_variants, [](arch::Variant v) { return arch::to_string(v); });
       }},
  };
  return t;
}

#undef INT_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD

const Entry& find(std::string_view key) {
  for (const auto& e : table()) {
    if (e.key == key) return e;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

train::Schedule Config::schedule() const {
  train::Schedule s = train::Schedule::scaled(epochs, lr_start, lr_end);
  if (decay_start > 0) s.decay_start_epoch = decay_start;
  if (decay_end > 0) s.decay_end_epoch = decay_end;
  if (s.decay_end_epoch < s.decay_start_epoch) {
    throw ConfigError("train.decay_end precedes train.decay_start");
  }
  return s;
}

train::TrainConfig Config::train_config() const {
  train::TrainConfig t;
  t.epochs = epochs;
  t.schedule = schedule();
  t.batch_size = batch_size;
  t.mixup = mixup;
  t.mixup_alpha = mixup_alpha;
  t.roll = roll;
  t.seed = seed;
  t.keep_last = keep_last;
  t.eval_train = eval_train;
  return t;
}

void set(Config& c, std::string_view key, std::string_view value) {
  const Entry& e = find(key);
  try {
    e.set(c, key, trim(value));
  } catch (const arch::SpecError& err) {
    throw ConfigError("key '" + std::string(key) + "': " + err.what());
  }
}

std::string get(const Config& c, std::string_view key) { return find(key).get(c); }

const std::vector<std::string>& keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& e : table()) out.push_back(e.key);
    return out;
  }();
  return k;
}

Config parse_config(std::string_view text, Config base) {
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      set(base, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return base;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  try {
    return parse_config(ss.str(), std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string format_config(const Config& c) {
  std::string out;
  for (const auto& e : table()) out += e.key + " = " + e.get(c) + "\n";
  const train::Schedule s = c.schedule();
  out += "# resolved schedule: decay over epochs " + std::to_string(s.decay_start_epoch) + ".." +
         std::to_string(s.decay_end_epoch) + " of " + std::to_string(s.total_epochs) + "\n";
  return out;
}

std::vector<int> parse_int_list(std::string_view s) {
  std::vector<int> out;
  std::string str(s);
  std::istringstream is(str);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    const std::string_view t = trim(tok);
    if (t.empty()) continue;
    const auto dash = t.find('-', 1);
    if (dash == std::string_view::npos) {
      out.push_back(to_int<int>("list", t));
    } else {
      const int a = to_int<int>("list", trim(t.substr(0, dash)));
      const int b = to_int<int>("list", trim(t.substr(dash + 1)));
      if (b < a) throw ConfigError("empty range '" + std::string(t) + "'");
      for (int v = a; v <= b; ++v) out.push_back(v);
    }
  }
  if (out.empty()) throw ConfigError("empty list '" + std::string(s) + "'");
  return out;
}

}  // namespace rfcnn::cfg
