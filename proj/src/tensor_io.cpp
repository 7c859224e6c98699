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

#include "rfcnn/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

namespace rfcnn::io {

namespace {

template <class U>
void put_le(std::ostream& os, U v) {
  unsigned char b[sizeof(U)];
  std::memcpy(b, &v, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(U));
  os.write(reinterpret_cast<const char*>(b), sizeof(U));
}

template <class U>
U get_le(const unsigned char* b) {
  unsigned char tmp[sizeof(U)];
  std::memcpy(tmp, b, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) std::reverse(tmp, tmp + sizeof(U));
  U v;
  std::memcpy(&v, tmp, sizeof(U));
  return v;
}

template <class T>
constexpr DType dtype_of() {
  return sizeof(T) == 4 ? DType::Float32 : DType::Float64;
}

}  // namespace

template <class T>
void write_tensor(std::ostream& os, const nn::Tensor<T>& t) {
  os.write(kTensorMagic, 4);
  const char code[4] = {static_cast<char>(dtype_of<T>()), 0, 0, 0};
  os.write(code, 4);
  for (std::size_t d : t.shape()) put_le<std::int64_t>(os, static_cast<std::int64_t>(d));
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.size() * sizeof(T)));
  } else {
    for (T v : t.values()) put_le<T>(os, v);
  }
  if (!os) throw IoError("tensor write failed");
}

template <class T>
nn::Tensor<T> read_tensor(std::istream& is) {
  unsigned char header[kTensorHeaderBytes];
  is.read(reinterpret_cast<char*>(header), kTensorHeaderBytes);
  if (is.gcount() != static_cast<std::streamsize>(kTensorHeaderBytes)) {
    throw IoError("truncated tensor header");
  }
  if (std::memcmp(header, kTensorMagic, 4) != 0) throw IoError("bad tensor magic");
  const auto code = static_cast<DType>(header[4]);
  if (code != DType::Float32 && code != DType::Float64) {
    throw IoError("unknown tensor dtype code " + std::to_string(header[4]));
  }
  nn::Shape shape{};
  for (int i = 0; i < 4; ++i) {
    const auto d = get_le<std::int64_t>(header + 8 + 8 * i);
    if (d < 0 || d > (std::int64_t{1} << 40)) throw IoError("implausible tensor dim");
    shape[static_cast<std::size_t>(i)] = static_cast<std::size_t>(d);
  }
  const std::size_t n = nn::shape_size(shape);
  const std::size_t width = code == DType::Float32 ? 4 : 8;
  std::vector<unsigned char> raw(n * width);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(is.gcount()) != raw.size()) {
    throw IoError("truncated tensor payload");
  }
  std::vector<T> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = code == DType::Float32
                    ? static_cast<T>(get_le<float>(raw.data() + 4 * i))
                    : static_cast<T>(get_le<double>(raw.data() + 8 * i));
  }
  return nn::Tensor<T>(shape, std::move(values));
}

template <class T>
void save_tensor(const std::string& path, const nn::Tensor<T>& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_tensor(os, t);
}

template <class T>
nn::Tensor<T> load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  try {
    return read_tensor<T>(is);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template void write_tensor(std::ostream&, const nn::Tensor<float>&);
template void write_tensor(std::ostream&, const nn::Tensor<double>&);
template nn::Tensor<float> read_tensor(std::istream&);
template nn::Tensor<double> read_tensor(std::istream&);
template void save_tensor(const std::string&, const nn::Tensor<float>&);
template void save_tensor(const std::string&, const nn::Tensor<double>&);
template nn::Tensor<float> load_tensor(const std::string&);
template nn::Tensor<double> load_tensor(const std::string&);

}  // namespace rfcnn::io
