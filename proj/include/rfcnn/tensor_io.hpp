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

// Tensor file layout (all integers little-endian):
//
//   offset  size  field
//   0       4     magic "RFTN"
//   4       1     dtype code: 1 = float32, 2 = float64
//   5       3     reserved, zero
//   8       32    dims: batch, channel, frequency, time as int64
//   40      ...   values, row-major, IEEE-754 little-endian

#ifndef RFCNN_TENSOR_IO_HPP_
#define RFCNN_TENSOR_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "rfcnn/tensor.hpp"

namespace rfcnn::io {

enum class DType : std::uint8_t { Float32 = 1, Float64 = 2 };

inline constexpr char kTensorMagic[4] = {'R', 'F', 'T', 'N'};
inline constexpr std::size_t kTensorHeaderBytes = 40;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
void write_tensor(std::ostream& os, const nn::Tensor<T>& t);

/// Reads either dtype and converts to T.
template <class T>
nn::Tensor<T> read_tensor(std::istream& is);

template <class T>
void save_tensor(const std::string& path, const nn::Tensor<T>& t);

template <class T>
nn::Tensor<T> load_tensor(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const void* data, std::size_t n,
                      std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace rfcnn::io

#endif  // RFCNN_TENSOR_IO_HPP_
