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
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "rfcnn/dsp.hpp"

namespace rfcnn::dsp {

namespace {

// FFTW planning touches global state.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

std::vector<double> make_window(std::size_t n, WindowKind kind) {
  std::vector<double> w(n, 1.0);
  if (kind == WindowKind::Hann) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n));
    }
  }
  return w;
}

}  // namespace

std::size_t StftConfig::hop_for_overlap(std::size_t window, double overlap) {
  if (!(overlap >= 0.0 && overlap < 1.0)) throw DspError("overlap must be in [0, 1)");
  const auto hop = static_cast<std::size_t>(std::lround(static_cast<double>(window) *
                                                        (1.0 - overlap)));
  return std::max<std::size_t>(hop, 1);
}

ComplexSpectrogram stft(std::span<const double> signal, const StftConfig& cfg) {
  if (cfg.window < 2 || cfg.hop == 0) throw DspError("stft: bad window or hop");
  if (signal.size() < cfg.window) {
    throw DspError("stft: signal of " + std::to_string(signal.size()) +
                   " samples is shorter than one window (" + std::to_string(cfg.window) + ")");
  }
  const std::size_t n = cfg.window;
  ComplexSpectrogram out;
  out.bins = n / 2 + 1;
  out.frames = (signal.size() - n) / cfg.hop + 1;
  out.values.assign(out.bins * out.frames, {});

  const std::vector<double> win = make_window(n, cfg.kind);
  double* in = fftw_alloc_real(n);
  fftw_complex* spec = fftw_alloc_complex(out.bins);
  fftw_plan plan;
  {
    std::lock_guard lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, spec, FFTW_ESTIMATE);
  }
  for (std::size_t f = 0; f < out.frames; ++f) {
    const double* x = signal.data() + f * cfg.hop;
    for (std::size_t i = 0; i < n; ++i) in[i] = x[i] * win[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < out.bins; ++k) {
      out.values[k * out.frames + f] = {spec[k][0], spec[k][1]};
    }
  }
  {
    std::lock_guard lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  fftw_free(in);
  return out;
}

std::vector<double> power(const ComplexSpectrogram& spec) {
  std::vector<double> p(spec.values.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(spec.values[i]);
  return p;
}

std::vector<double> fft_frequencies(std::size_t n_bins, double sample_rate) {
  std::vector<double> f(n_bins);
  const double n_fft = 2.0 * static_cast<double>(n_bins - 1);
  for (std::size_t k = 0; k < n_bins; ++k) f[k] = static_cast<double>(k) * sample_rate / n_fft;
  return f;
}

double a_weighting_db(double hz) {
  if (hz <= 0.0) return kAWeightingMinDb;
  constexpr double c0 = 12194.217 * 12194.217;
  constexpr double c1 = 20.598997 * 20.598997;
  constexpr double c2 = 107.65265 * 107.65265;
  constexpr double c3 = 737.86223 * 737.86223;
  const double f2 = hz * hz;
  const double db = 2.0 + 20.0 * (std::log10(c0) + 4.0 * std::log10(hz) - std::log10(f2 + c0) -
                                  std::log10(f2 + c1) - 0.5 * std::log10(f2 + c2) -
                                  0.5 * std::log10(f2 + c3));
  return std::max(db, kAWeightingMinDb);
}

std::vector<double> perceptual_weight(std::span<const double> power_spec,
                                      std::span<const double> bin_freqs) {
  const std::size_t bins = bin_freqs.size();
  if (bins == 0 || power_spec.size() % bins != 0) {
    throw DspError("perceptual_weight: spectrogram size is not a multiple of the bin count");
  }
  const std::size_t frames = power_spec.size() / bins;
  std::vector<double> out(power_spec.size());
  for (std::size_t k = 0; k < bins; ++k) {
    const double a = a_weighting_db(bin_freqs[k]);
    for (std::size_t t = 0; t < frames; ++t) {
      const double p = power_spec[k * frames + t];
      out[k * frames + t] = 10.0 * std::log10(p + kPowerFloor) + a;
    }
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t n_fft_bins, double sample_rate,
                             double fmin, double fmax, MelNorm norm) {
  if (fmax <= 0.0) fmax = sample_rate / 2.0;
  if (n_mels == 0 || n_fft_bins < 2) throw DspError("mel_filterbank: empty shape");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw DspError("mel_filterbank: need 0 <= fmin < fmax <= sr/2");
  }
  const double mlo = hz_to_mel(fmin);
  const double mhi = hz_to_mel(fmax);
  std::vector<double> edges(n_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mlo + (mhi - mlo) * static_cast<double>(i) /
                                   static_cast<double>(n_mels + 1));
  }
  const std::vector<double> freqs = fft_frequencies(n_fft_bins, sample_rate);

  MelFilterbank fb;
  fb.n_mels = n_mels;
  fb.n_bins = n_fft_bins;
  fb.weights.assign(n_mels * n_fft_bins, 0.0);
  std::vector<std::size_t> empty;
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    double* row = fb.weights.data() + m * n_fft_bins;
    double peak = 0.0;
    for (std::size_t k = 0; k < n_fft_bins; ++k) {
      const double up = (freqs[k] - lo) / (mid - lo);
      const double down = (hi - freqs[k]) / (hi - mid);
      row[k] = std::max(0.0, std::min(up, down));
      peak = std::max(peak, row[k]);
    }
    if (peak == 0.0) {
      empty.push_back(m);
      continue;
    }
    const double scale = norm == MelNorm::Slaney ? 2.0 / (hi - lo)
                         : norm == MelNorm::Peak ? 1.0 / peak
                                                 : 1.0;
    for (std::size_t k = 0; k < n_fft_bins; ++k) row[k] *= scale;
  }
  if (!empty.empty()) {
    std::string rows;
    for (std::size_t m : empty) rows += (rows.empty() ? "" : ",") + std::to_string(m);
    throw DspError("mel_filterbank: " + std::to_string(empty.size()) + " empty filter(s) for " +
                   std::to_string(n_mels) + " mels over " + std::to_string(n_fft_bins) +
                   " bins; rows " + rows);
  }
  return fb;
}

std::vector<double> apply_filterbank(const MelFilterbank& fb, std::span<const double> spec,
                                     std::size_t frames) {
  if (spec.size() != fb.n_bins * frames) {
    throw DspError("apply_filterbank: spectrogram has " + std::to_string(spec.size()) +
                   " values, expected " + std::to_string(fb.n_bins) + " x " +
                   std::to_string(frames));
  }
  std::vector<double> out(fb.n_mels * frames, 0.0);
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    const auto row = fb.row(m);
    double* dst = out.data() + m * frames;
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      const double w = row[k];
      if (w == 0.0) continue;
      const double* src = spec.data() + k * frames;
      for (std::size_t t = 0; t < frames; ++t) dst[t] += w * src[t];
    }
  }
  return out;
}

}  // namespace rfcnn::dsp
