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

#include "rfcnn/checkpoint.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rfcnn/tensor_io.hpp"

namespace rfcnn::model {

namespace {

constexpr const char* kHeader = "rfcnn-checkpoint 1";

std::string read_line(std::istream& is, const std::string& path) {
  std::string line;
  if (!std::getline(is, line)) throw io::IoError(path + ": truncated checkpoint header");
  return line;
}

std::string expect_field(const std::string& line, const std::string& key,
                         const std::string& path) {
  if (line.rfind(key + " ", 0) != 0) {
    throw io::IoError(path + ": expected '" + key + "' line, got '" + line + "'");
  }
  return line.substr(key.size() + 1);
}

}  // namespace

template <class T>
void save_checkpoint(const std::string& path, Network<T>& net,
                     const std::vector<NamedTensor<T>>& extras) {
  const std::string spec_text = arch::serialize_spec(net.spec());
  std::ostringstream body(std::ios::binary);
  std::size_t count = 0;
  for (const StateRef<T>& s : net.state()) {
    body << s.name << '\n';
    io::write_tensor(body, Tensor<T>(s.shape, std::vector<T>(s.value.begin(), s.value.end())));
    ++count;
  }
  for (const NamedTensor<T>& e : extras) {
    body << "extra:" << e.name << '\n';
    io::write_tensor(body, e.value);
    ++count;
  }
  const std::string payload = body.str();
  std::uint64_t h = io::fnv1a64(spec_text.data(), spec_text.size());
  h = io::fnv1a64(payload.data(), payload.size(), h);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw io::IoError("cannot open " + tmp + " for writing");
    os << kHeader << '\n' << "spec_bytes " << spec_text.size() << '\n' << spec_text;
    os << "options pool=" << (net.options().pool == PoolKind::Max ? "max" : "avg")
       << " shake=" << (net.options().shake == ShakeMode::Shake ? "shake" : "even") << '\n';
    os << "tensors " << count << '\n' << "checksum " << hex << '\n';
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!os) throw io::IoError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw io::IoError("cannot rename " + tmp + " to " + path);
  }
}

template <class T>
Checkpoint<T> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io::IoError("cannot open " + path);
  if (read_line(is, path) != kHeader) throw io::IoError(path + ": not an rfcnn checkpoint");
  const std::size_t spec_bytes =
      std::stoul(expect_field(read_line(is, path), "spec_bytes", path));
  std::string spec_text(spec_bytes, '\0');
  is.read(spec_text.data(), static_cast<std::streamsize>(spec_bytes));
  if (static_cast<std::size_t>(is.gcount()) != spec_bytes) {
    throw io::IoError(path + ": truncated spec");
  }
  const std::string opts = expect_field(read_line(is, path), "options", path);
  ModelOptions options;
  options.pool = opts.find("pool=avg") != std::string::npos ? PoolKind::Avg : PoolKind::Max;
  options.shake = opts.find("shake=even") != std::string::npos ? ShakeMode::Even : ShakeMode::Shake;
  const std::size_t count = std::stoul(expect_field(read_line(is, path), "tensors", path));
  const std::string want_hex = expect_field(read_line(is, path), "checksum", path);

  const std::string payload{std::istreambuf_iterator<char>(is), {}};
  std::uint64_t h = io::fnv1a64(spec_text.data(), spec_text.size());
  h = io::fnv1a64(payload.data(), payload.size(), h);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  if (want_hex != hex) throw io::IoError(path + ": checksum mismatch");

  Checkpoint<T> ck{Network<T>::init(arch::parse_spec(spec_text), 0, options), {}};
  std::map<std::string, StateRef<T>> slots;
  for (StateRef<T>& s : ck.net.state()) slots.emplace(s.name, s);

  std::istringstream body(payload, std::ios::binary);
  std::size_t restored = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name;
    if (!std::getline(body, name)) throw io::IoError(path + ": truncated tensor list");
    Tensor<T> value = io::read_tensor<T>(body);
    if (name.rfind("extra:", 0) == 0) {
      ck.extras.push_back({name.substr(6), std::move(value)});
      continue;
    }
    auto it = slots.find(name);
    if (it == slots.end()) throw io::IoError(path + ": unknown tensor '" + name + "'");
    if (value.shape() != it->second.shape) {
      throw io::IoError(path + ": shape mismatch for '" + name + "'");
    }
    std::copy(value.storage().begin(), value.storage().end(), it->second.value.begin());
    ++restored;
  }
  if (restored != slots.size()) throw io::IoError(path + ": missing network tensors");
  return ck;
}

template void save_checkpoint(const std::string&, Network<float>&,
                              const std::vector<NamedTensor<float>>&);
template void save_checkpoint(const std::string&, Network<double>&,
                              const std::vector<NamedTensor<double>>&);
template Checkpoint<float> load_checkpoint(const std::string&);
template Checkpoint<double> load_checkpoint(const std::string&);

}  // namespace rfcnn::model
