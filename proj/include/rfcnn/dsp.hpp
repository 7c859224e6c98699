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

#ifndef RFCNN_DSP_HPP_
#define RFCNN_DSP_HPP_

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfcnn/tensor.hpp"

namespace rfcnn::dsp {

class DspError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- audio I/O -------------------------------------------------------------

struct AudioClip {
  std::vector<std::vector<double>> samples;  // one sequence per channel
  int sample_rate = 0;

  std::size_t channels() const { return samples.size(); }
  std::size_t length() const { return samples.empty() ? 0 : samples[0].size(); }
};

enum class WavEncoding { Pcm16, Float32 };

/// RIFF/WAVE, PCM 16-bit or IEEE float 32-bit, 1-2 channels. Samples are
/// scaled to [-1, 1] (16-bit: v / 32768).
AudioClip load_wav(const std::string& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding enc);
void save_wav(const std::string& path, const AudioClip& clip, WavEncoding enc);

// --- resampling ------------------------------------------------------------

struct ResampleOptions {
  bool allow_upsampling = false;
  int zero_crossings = 32;
  double kaiser_beta = 8.6;
  double rolloff = 0.95;
};

/// Kaiser-windowed sinc, polyphase over the reduced ratio target/source.
/// Output length is round(n * target / source). Equal rates pass through.
AudioClip resample(const AudioClip& clip, int target_hz = 22050,
                   const ResampleOptions& opt = {});

// --- spectral analysis -----------------------------------------------------

enum class WindowKind { Hann, Rectangular };

struct StftConfig {
  std::size_t window = 2048;
  std::size_t hop = 1536;
  WindowKind kind = WindowKind::Hann;

  /// hop = window * (1 - overlap)
  static std::size_t hop_for_overlap(std::size_t window, double overlap);
};

/// Bin-major complex spectrogram: value(bin, frame).
struct ComplexSpectrogram {
  std::size_t bins = 0;
  std::size_t frames = 0;
  std::vector<std::complex<double>> values;

  const std::complex<double>& at(std::size_t bin, std::size_t frame) const {
    return values[bin * frames + frame];
  }
};

/// No centering or padding: frames = floor((n - window) / hop) + 1.
ComplexSpectrogram stft(std::span<const double> signal, const StftConfig& cfg = {});

/// |X|^2, bin-major.
std::vector<double> power(const ComplexSpectrogram& spec);

/// Centre frequency of each one-sided FFT bin.
std::vector<double> fft_frequencies(std::size_t n_bins, double sample_rate);

inline constexpr double kPowerFloor = 1e-10;
inline constexpr double kAWeightingMinDb = -80.0;

/// Standard A-weighting curve in dB, clamped below at -80 dB.
double a_weighting_db(double hz);

/// 10 log10(power + 1e-10) + A(f) for every bin; bin-major in and out.
std::vector<double> perceptual_weight(std::span<const double> power_spec,
                                      std::span<const double> bin_freqs);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

enum class MelNorm { None, Peak, Slaney };

struct MelFilterbank {
  std::size_t n_mels = 0;
  std::size_t n_bins = 0;
  std::vector<double> weights;  // [n_mels, n_bins]

  std::span<const double> row(std::size_t m) const {
    return {weights.data() + m * n_bins, n_bins};
  }
};

/// Triangular filters with centres equally spaced on the mel scale.
/// fmax <= 0 selects sr / 2.
MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t n_fft_bins,
                             double sample_rate, double fmin = 0.0,
                             double fmax = 0.0, MelNorm norm = MelNorm::Slaney);

/// [n_bins, frames] -> [n_mels, frames]
std::vector<double> apply_filterbank(const MelFilterbank& fb,
                                     std::span<const double> spec,
                                     std::size_t frames);

// --- pipeline --------------------------------------------------------------

struct PipelineConfig {
  int sample_rate = 22050;
  std::size_t window = 2048;
  std::size_t hop = 1536;
  std::size_t n_mels = 256;
  double fmin = 0.0;
  double fmax = 0.0;  // sr / 2
  MelNorm mel_norm = MelNorm::Slaney;
  bool stereo = true;  // duplicate mono input into two planes
  bool allow_upsampling = false;
};

/// values: [1, channels, n_mels, frames].
struct SpectrogramClip {
  nn::Tensor<float> values;
  int label = -1;
  std::string source_id;
};

SpectrogramClip audio_to_spectrogram(const AudioClip& clip,
                                     const PipelineConfig& cfg,
                                     std::string source_id = {}, int label = -1);

SpectrogramClip wav_to_spectrogram(const std::string& path,
                                   const PipelineConfig& cfg, int label = -1);

// --- normalization ---------------------------------------------------------

inline constexpr double kStdFloor = 1e-5;

/// Per (channel, mel bin) statistics, shape [1, channels, n_mels, 1].
/// `std` is already floored at kStdFloor.
struct NormStats {
  nn::Tensor<double> mean;
  nn::Tensor<double> std;
};

/// PerBin: statistics per (channel, mel bin). Global: one pair per channel,
/// broadcast over bins. None: mean 0, std 1.
enum class NormMode { PerBin, Global, None };

NormStats fit_norm(std::span<const SpectrogramClip> clips, NormMode mode = NormMode::PerBin);
SpectrogramClip apply_norm(const SpectrogramClip& clip, const NormStats& stats);

void save_norm(const std::string& prefix, const NormStats& stats);
NormStats load_norm(const std::string& prefix);

}  // namespace rfcnn::dsp

#endif  // RFCNN_DSP_HPP_
