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

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rfcnn/checkpoint.hpp"
#include "rfcnn/tensor_io.hpp"
#include "test_util.hpp"

namespace rfcnn {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rfcnn_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(TensorFile, ByteLayout) {
  nn::Tensor<float> t({1, 2, 1, 1}, std::vector<float>{1.0f, -2.0f});
  std::ostringstream os;
  io::write_tensor(os, t);
  const std::string b = os.str();
  ASSERT_EQ(b.size(), io::kTensorHeaderBytes + 8);
  EXPECT_EQ(b.substr(0, 4), "RFTN");
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 0);
  EXPECT_EQ(b[8], 1);   // batch, little-endian
  EXPECT_EQ(b[16], 2);  // channels
  float v;
  std::memcpy(&v, b.data() + 44, 4);
  EXPECT_EQ(v, -2.0f);
}

TEST(TensorFile, RoundTripAndConversion) {
  const auto d = testing::random_tensor<double>({2, 3, 4, 5}, 1);
  std::stringstream ss;
  io::write_tensor(ss, d);
  EXPECT_EQ(io::read_tensor<double>(ss), d);
  ss.clear();
  ss.seekg(0);
  EXPECT_EQ(io::read_tensor<float>(ss), d.cast<float>());
}

TEST(TensorFile, Corruption) {
  std::stringstream bad("XXXX");
  EXPECT_THROW(io::read_tensor<float>(bad), io::IoError);
  std::ostringstream os;
  io::write_tensor(os, nn::Tensor<float>({1, 1, 2, 2}));
  std::stringstream trunc(os.str().substr(0, os.str().size() - 3));
  EXPECT_THROW(io::read_tensor<float>(trunc), io::IoError);
}

TEST(Checkpoint, RoundTripRestoresOutputs) {
  const auto dir = temp_dir("ckpt");
  auto spec = arch::make_network(arch::Rho(2), arch::Variant::ShakeShake, 4, 2, 2);
  auto net = model::Network<float>::init(spec, 11, {model::PoolKind::Max, model::ShakeMode::Even});
  const auto x = testing::random_tensor<float>({3, 2, 32, 32}, 12);
  net.forward(x);  // move BN running statistics away from their defaults
  net.set_mode(nn::Mode::Eval);
  const auto y = net.forward(x);
  const std::string path = (dir / "a.rfck").string();
  model::save_checkpoint<float>(path, net, {{"norm.mean", nn::Tensor<float>({1, 2, 3, 1}, 0.5f)}});

  auto ck = model::load_checkpoint<float>(path);
  EXPECT_EQ(ck.net.spec(), spec);
  EXPECT_EQ(ck.net.options().shake, model::ShakeMode::Even);
  ck.net.set_mode(nn::Mode::Eval);
  EXPECT_EQ(ck.net.forward(x), y);
  ASSERT_EQ(ck.extras.size(), 1u);
  EXPECT_EQ(ck.extras[0].name, "norm.mean");
  EXPECT_EQ(ck.extras[0].value(0, 1, 2, 0), 0.5f);
}

TEST(Checkpoint, DetectsCorruption) {
  const auto dir = temp_dir("corrupt");
  auto net = model::Network<float>::init(arch::make_network(arch::Rho(0), arch::Variant::Plain, 2, 2, 1), 1);
  const std::string path = (dir / "a.rfck").string();
  model::save_checkpoint(path, net);
  std::string bytes;
  {
    std::ifstream is(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(is), {});
  }
  bytes[bytes.size() - 2] ^= 0x5a;
  {
    std::ofstream os(path, std::ios::binary);
    os << bytes;
  }
  EXPECT_THROW(model::load_checkpoint<float>(path), io::IoError);
  EXPECT_THROW(model::load_checkpoint<float>((dir / "missing").string()), io::IoError);
}

}  // namespace
}  // namespace rfcnn
