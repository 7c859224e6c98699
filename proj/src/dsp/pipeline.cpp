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

#include "rfcnn/dsp.hpp"
#include "rfcnn/tensor_io.hpp"

namespace rfcnn::dsp {

SpectrogramClip audio_to_spectrogram(const AudioClip& clip, const PipelineConfig& cfg,
                                     std::string source_id, int label) {
  if (clip.channels() < 1 || clip.channels() > 2) {
    throw DspError("audio_to_spectrogram: need 1 or 2 channels");
  }
  for (const auto& ch : clip.samples) {
    if (ch.size() != clip.length()) throw DspError("audio_to_spectrogram: ragged channels");
  }
  ResampleOptions ropt;
  ropt.allow_upsampling = cfg.allow_upsampling;
  AudioClip audio = resample(clip, cfg.sample_rate, ropt);

  if (cfg.stereo && audio.channels() == 1) {
    audio.samples.push_back(audio.samples[0]);
  } else if (!cfg.stereo && audio.channels() == 2) {
    for (std::size_t i = 0; i < audio.length(); ++i) {
      audio.samples[0][i] = 0.5 * (audio.samples[0][i] + audio.samples[1][i]);
    }
    audio.samples.pop_back();
  }

  const StftConfig scfg{cfg.window, cfg.hop, WindowKind::Hann};
  const std::size_t bins = cfg.window / 2 + 1;
  const MelFilterbank fb = mel_filterbank(cfg.n_mels, bins, cfg.sample_rate, cfg.fmin,
                                          cfg.fmax, cfg.mel_norm);
  const std::vector<double> freqs = fft_frequencies(bins, cfg.sample_rate);

  SpectrogramClip out;
  out.label = label;
  out.source_id = std::move(source_id);
  for (std::size_t c = 0; c < audio.channels(); ++c) {
    const ComplexSpectrogram s = stft(audio.samples[c], scfg);
    const std::vector<double> db = perceptual_weight(power(s), freqs);
    const std::vector<double> mel = apply_filterbank(fb, db, s.frames);
    if (c == 0) out.values = nn::Tensor<float>({1, audio.channels(), cfg.n_mels, s.frames});
    float* dst = out.values.plane(0, c);
    for (std::size_t i = 0; i < mel.size(); ++i) {
      if (!std::isfinite(mel[i])) throw DspError("audio_to_spectrogram: non-finite value");
      dst[i] = static_cast<float>(mel[i]);
    }
  }
  return out;
}

SpectrogramClip wav_to_spectrogram(const std::string& path, const PipelineConfig& cfg,
                                   int label) {
  return audio_to_spectrogram(load_wav(path), cfg, path, label);
}

NormStats fit_norm(std::span<const SpectrogramClip> clips, NormMode mode) {
  if (clips.size() < 2) throw DspError("fit_norm: need at least 2 clips");
  const std::size_t C = clips[0].values.channels();
  const std::size_t M = clips[0].values.freq();
  std::size_t count = 0;
  for (const auto& clip : clips) {
    if (clip.values.batch() != 1 || clip.values.channels() != C || clip.values.freq() != M) {
      throw DspError("fit_norm: clip " + clip.source_id + " has shape " +
                     nn::shape_string(clip.values.shape()) + ", inconsistent with the first");
    }
    count += clip.values.time();
  }
  NormStats st{nn::Tensor<double>({1, C, M, 1}), nn::Tensor<double>({1, C, M, 1}, 1.0)};
  if (mode == NormMode::None) return st;
  // Rows pooled together: all bins of a channel for Global, one bin otherwise.
  const std::size_t group = mode == NormMode::Global ? M : 1;
  std::fill(st.std.values().begin(), st.std.values().end(), 0.0);
  // Two passes so the variance is computed around the final mean.
  for (const auto& clip : clips) {
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t m = 0; m < M; ++m)
        for (std::size_t t = 0; t < clip.values.time(); ++t)
          st.mean(0, c, m, 0) += clip.values(0, c, m, t);
  }
  auto pool = [&](nn::Tensor<double>& t) {
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t m0 = 0; m0 < M; m0 += group) {
        double sum = 0.0;
        for (std::size_t m = m0; m < m0 + group; ++m) sum += t(0, c, m, 0);
        for (std::size_t m = m0; m < m0 + group; ++m) t(0, c, m, 0) = sum;
      }
  };
  const auto n = static_cast<double>(count * group);
  pool(st.mean);
  for (double& v : st.mean.values()) v /= n;
  for (const auto& clip : clips) {
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t m = 0; m < M; ++m) {
        const double mu = st.mean(0, c, m, 0);
        for (std::size_t t = 0; t < clip.values.time(); ++t) {
          const double d = clip.values(0, c, m, t) - mu;
          st.std(0, c, m, 0) += d * d;
        }
      }
  }
  pool(st.std);
  for (double& v : st.std.values()) {
    v = std::max(std::sqrt(v / n), kStdFloor);
  }
  return st;
}

SpectrogramClip apply_norm(const SpectrogramClip& clip, const NormStats& stats) {
  const auto& x = clip.values;
  if (x.channels() != stats.mean.channels() || x.freq() != stats.mean.freq()) {
    throw DspError("apply_norm: clip shape " + nn::shape_string(x.shape()) +
                   " does not match stats " + nn::shape_string(stats.mean.shape()));
  }
  SpectrogramClip out = clip;
  for (std::size_t n = 0; n < x.batch(); ++n)
    for (std::size_t c = 0; c < x.channels(); ++c)
      for (std::size_t m = 0; m < x.freq(); ++m) {
        const double mu = stats.mean(0, c, m, 0);
        const double sd = std::max(stats.std(0, c, m, 0), kStdFloor);
        for (std::size_t t = 0; t < x.time(); ++t) {
          out.values(n, c, m, t) = static_cast<float>((x(n, c, m, t) - mu) / sd);
        }
      }
  return out;
}

void save_norm(const std::string& prefix, const NormStats& stats) {
  io::save_tensor(prefix + ".mean.rftn", stats.mean);
  io::save_tensor(prefix + ".std.rftn", stats.std);
}

NormStats load_norm(const std::string& prefix) {
  NormStats st{io::load_tensor<double>(prefix + ".mean.rftn"),
               io::load_tensor<double>(prefix + ".std.rftn")};
  if (st.mean.shape() != st.std.shape() || st.mean.batch() != 1 || st.mean.time() != 1) {
    throw DspError("load_norm: malformed statistics at " + prefix);
  }
  return st;
}

}  // namespace rfcnn::dsp
