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
#include <numbers>
#include <numeric>

#include "rfcnn/dsp.hpp"

namespace rfcnn::dsp {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

double kaiser(double x, double half_width, double beta) {
  const double r = x / half_width;
  if (r <= -1.0 || r >= 1.0) return 0.0;
  return std::cyl_bessel_i(0.0, beta * std::sqrt(1.0 - r * r)) /
         std::cyl_bessel_i(0.0, beta);
}

// One filter per output phase: taps[phase][j] multiplies x[base + first + j].
struct PolyphaseFilter {
  long first = 0;
  std::size_t taps = 0;
  std::vector<std::vector<double>> phases;
};

PolyphaseFilter design(long up, long down, const ResampleOptions& opt) {
  const double cutoff = std::min(1.0, static_cast<double>(up) / static_cast<double>(down)) *
                        opt.rolloff;
  const double half_width = opt.zero_crossings / cutoff;
  PolyphaseFilter f;
  f.first = -static_cast<long>(std::ceil(half_width));
  f.taps = static_cast<std::size_t>(2 * -f.first + 2);
  f.phases.assign(static_cast<std::size_t>(up), std::vector<double>(f.taps));
  for (long p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / static_cast<double>(up);
    for (std::size_t j = 0; j < f.taps; ++j) {
      // Distance from the output instant (base + frac) to input sample.
      const double d = frac - static_cast<double>(f.first + static_cast<long>(j));
      f.phases[static_cast<std::size_t>(p)][j] =
          cutoff * sinc(cutoff * d) * kaiser(d, half_width, opt.kaiser_beta);
    }
  }
  return f;
}

}  // namespace

AudioClip resample(const AudioClip& clip, int target_hz, const ResampleOptions& opt) {
  if (clip.sample_rate <= 0 || target_hz <= 0) throw DspError("resample: bad sample rate");
  if (clip.sample_rate == target_hz) return clip;
  if (target_hz > clip.sample_rate && !opt.allow_upsampling) {
    throw DspError("resample: upsampling " + std::to_string(clip.sample_rate) + " -> " +
                   std::to_string(target_hz) + " Hz requires allow_upsampling");
  }
  const long g = std::gcd(static_cast<long>(target_hz), static_cast<long>(clip.sample_rate));
  const long up = target_hz / g;
  const long down = clip.sample_rate / g;
  const PolyphaseFilter filt = design(up, down, opt);

  const long n_in = static_cast<long>(clip.length());
  const long n_out = std::lround(static_cast<double>(n_in) * static_cast<double>(up) /
                                 static_cast<double>(down));
  AudioClip out;
  out.sample_rate = target_hz;
  out.samples.assign(clip.channels(), std::vector<double>(static_cast<std::size_t>(n_out)));
  for (std::size_t c = 0; c < clip.channels(); ++c) {
    const std::vector<double>& x = clip.samples[c];
    for (long n = 0; n < n_out; ++n) {
      const long num = n * down;
      const long base = num / up;
      const auto& h = filt.phases[static_cast<std::size_t>(num % up)];
      double acc = 0.0;
      for (std::size_t j = 0; j < filt.taps; ++j) {
        const long i = base + filt.first + static_cast<long>(j);
        if (i >= 0 && i < n_in) acc += h[j] * x[static_cast<std::size_t>(i)];
      }
      out.samples[c][static_cast<std::size_t>(n)] = acc;
    }
  }
  return out;
}

}  // namespace rfcnn::dsp
