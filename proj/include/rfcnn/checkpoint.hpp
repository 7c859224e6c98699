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

// Checkpoint layout:
//
//   rfcnn-checkpoint 1\n
//   spec_bytes <n>\n
//   <n bytes of architecture spec text>
//   options pool=<max|avg> shake=<shake|even>\n
//   tensors <count>\n
//   checksum <16 hex digits>\n
//   then <count> records: "<name>\n" followed by one tensor file record.
//
// The checksum is FNV-1a 64 over the spec text and every record (name line
// and tensor bytes) in order.

#ifndef RFCNN_CHECKPOINT_HPP_
#define RFCNN_CHECKPOINT_HPP_

#include <string>
#include <vector>

#include "rfcnn/model.hpp"

namespace rfcnn::model {

template <class T>
struct NamedTensor {
  std::string name;
  Tensor<T> value;
};

template <class T>
struct Checkpoint {
  Network<T> net;
  /// Auxiliary tensors (e.g. "norm.mean", "norm.std").
  std::vector<NamedTensor<T>> extras;
};

template <class T>
void save_checkpoint(const std::string& path, Network<T>& net,
                     const std::vector<NamedTensor<T>>& extras = {});

template <class T>
Checkpoint<T> load_checkpoint(const std::string& path);

}  // namespace rfcnn::model

#endif  // RFCNN_CHECKPOINT_HPP_
