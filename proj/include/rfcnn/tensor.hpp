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

#ifndef RFCNN_TENSOR_HPP_
#define RFCNN_TENSOR_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rfcnn::nn {

/// [batch, channel, frequency, time]
using Shape = std::array<std::size_t, 4>;

inline std::size_t shape_size(const Shape& s) { return s[0] * s[1] * s[2] * s[3]; }

inline std::string shape_string(const Shape& s) {
  return "[" + std::to_string(s[0]) + ", " + std::to_string(s[1]) + ", " +
         std::to_string(s[2]) + ", " + std::to_string(s[3]) + "]";
}

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major 4-D array. The shape is fixed at construction.
template <class T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(const Shape& shape, T fill = T{})
      : shape_(shape), data_(shape_size(shape), fill) {}
  Tensor(const Shape& shape, std::vector<T> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_string(shape_));
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t batch() const noexcept { return shape_[0]; }
  std::size_t channels() const noexcept { return shape_[1]; }
  std::size_t freq() const noexcept { return shape_[2]; }
  std::size_t time() const noexcept { return shape_[3]; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t f,
                    std::size_t t) const noexcept {
    return ((n * shape_[1] + c) * shape_[2] + f) * shape_[3] + t;
  }
  T& operator()(std::size_t n, std::size_t c, std::size_t f, std::size_t t) noexcept {
    return data_[index(n, c, f, t)];
  }
  const T& operator()(std::size_t n, std::size_t c, std::size_t f,
                      std::size_t t) const noexcept {
    return data_[index(n, c, f, t)];
  }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Pointer to the (f, t) plane of sample n, channel c.
  T* plane(std::size_t n, std::size_t c) noexcept { return data_.data() + index(n, c, 0, 0); }
  const T* plane(std::size_t n, std::size_t c) const noexcept {
    return data_.data() + index(n, c, 0, 0);
  }
  /// Pointer to all channels of sample n.
  T* sample(std::size_t n) noexcept { return data_.data() + index(n, 0, 0, 0); }
  const T* sample(std::size_t n) const noexcept { return data_.data() + index(n, 0, 0, 0); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <class U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{0, 0, 0, 0};
  std::vector<T> data_;
};

template <class T>
void require_shape(const Tensor<T>& t, const Shape& want, const char* what) {
  if (t.shape() != want) {
    throw ShapeError(std::string(what) + ": expected shape " + shape_string(want) +
                     ", got " + shape_string(t.shape()));
  }
}

}  // namespace rfcnn::nn

#endif  // RFCNN_TENSOR_HPP_
