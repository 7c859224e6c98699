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
#include <cstring>
#include <fstream>
#include <iterator>

#include "rfcnn/dsp.hpp"

namespace rfcnn::dsp {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw DspError("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint8_t* chunk = b.data() + pos;
    const std::uint32_t size = u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > b.size()) throw DspError("truncated fmt chunk");
      format = u16(b.data() + body);
      channels = u16(b.data() + body + 2);
      rate = u32(b.data() + body + 4);
      bits = u16(b.data() + body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw DspError("truncated extensible fmt chunk");
        format = u16(b.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > b.size()) throw DspError("truncated data chunk");
      data = b.subspan(body, size);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw DspError("missing fmt chunk");
  if (!have_data) throw DspError("missing data chunk");
  if (channels < 1 || channels > 2) {
    throw DspError("unsupported channel count " + std::to_string(channels));
  }
  if (rate == 0) throw DspError("zero sample rate");
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32) {
    throw DspError("unsupported encoding (format " + std::to_string(format) + ", " +
                   std::to_string(bits) + " bits); need PCM16 or float32");
  }
  const std::size_t width = bits / 8;
  const std::size_t frame_bytes = width * channels;
  if (data.size() % frame_bytes != 0) throw DspError("truncated sample frame");
  const std::size_t n = data.size() / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.assign(channels, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data.data() + i * frame_bytes + c * width;
      if (pcm16) {
        clip.samples[c][i] = static_cast<std::int16_t>(u16(p)) / 32768.0;
      } else {
        const std::uint32_t raw = u32(p);
        float v;
        std::memcpy(&v, &raw, 4);
        clip.samples[c][i] = v;
      }
    }
  }
  return clip;
}

AudioClip load_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DspError("cannot open " + path);
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(is), {}};
  try {
    return decode_wav(bytes);
  } catch (const DspError& e) {
    throw DspError(path + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip, WavEncoding enc) {
  const auto channels = static_cast<std::uint16_t>(clip.channels());
  if (channels < 1 || channels > 2) throw DspError("encode_wav: need 1 or 2 channels");
  const std::uint16_t bits = enc == WavEncoding::Pcm16 ? 16 : 32;
  const std::uint32_t width = bits / 8u;
  const auto n = static_cast<std::uint32_t>(clip.length());
  const std::uint32_t data_bytes = n * channels * width;

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, enc == WavEncoding::Pcm16 ? kFormatPcm : kFormatFloat);
  put16(out, channels);
  put32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate) * channels * width);
  put16(out, static_cast<std::uint16_t>(channels * width));
  put16(out, bits);
  put_tag(out, "data");
  put32(out, data_bytes);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint16_t c = 0; c < channels; ++c) {
      const double v = clip.samples[c][i];
      if (enc == WavEncoding::Pcm16) {
        const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
        put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t raw;
        std::memcpy(&raw, &f, 4);
        put32(out, raw);
      }
    }
  }
  return out;
}

void save_wav(const std::string& path, const AudioClip& clip, WavEncoding enc) {
  const auto bytes = encode_wav(clip, enc);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DspError("cannot open " + path + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
}

}  // namespace rfcnn::dsp
