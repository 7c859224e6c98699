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

#include "rfcnn/model.hpp"
#include "rfcnn/rfcalc.hpp"
#include "test_util.hpp"

namespace rfcnn::rf {
namespace {

using arch::Variant;

TEST(RfStep, Examples) {
  const RfState s0;
  const RfState s1 = rf_step(s0, arch::conv_layer(5, 2, 1, 1));
  EXPECT_EQ(s1.f, (RfAxis{5, 2}));
  const RfState s2 = rf_step(s1, arch::conv_layer(3, 1, 1, 1));
  EXPECT_EQ(s2.f, (RfAxis{9, 2}));
  const RfState s3 = rf_step(s2, arch::maxpool_layer(1));
  EXPECT_EQ(s3.f, (RfAxis{11, 4}));
  arch::LayerSpec bn;
  bn.kind = arch::LayerKind::BatchNorm;
  EXPECT_EQ(rf_step(s3, bn), s3);
}

TEST(MaxRf, PublishedTable) {
  for (int r = 0; r < 22; ++r) {
    const MaxRf m = max_rf(arch::make_network(arch::Rho(r), Variant::Plain, 10, 8, 2));
    EXPECT_EQ(m.f, kPublishedMaxRf[static_cast<size_t>(r)]) << "rho=" << r;
    EXPECT_EQ(m.t, m.f);
  }
  EXPECT_EQ(max_rf(arch::make_network(arch::Rho(5), Variant::Plain, 10, 8, 2)).f, 87);
}

TEST(RfTable, SingleRowAndVariantInvariance) {
  const auto one = rf_table(4, 4, Variant::Plain);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].rho, 4);
  EXPECT_EQ(one[0].rf.f, 71);
  const auto plain = rf_table(0, 22, Variant::Plain);
  for (Variant v : {Variant::PreAct, Variant::ShakeShake, Variant::FreqAware}) {
    const auto other = rf_table(0, 22, v);
    ASSERT_EQ(other.size(), plain.size());
    for (std::size_t i = 0; i < plain.size(); ++i) EXPECT_EQ(other[i].rf, plain[i].rf);
  }
  for (std::size_t i = 1; i < plain.size(); ++i) EXPECT_GE(plain[i].rf.f, plain[i - 1].rf.f);
}

TEST(RfBox, SizeEqualsMaxRf) {
  for (int r : {0, 3, 9}) {
    const auto spec = arch::make_network(arch::Rho(r), Variant::Plain, 10, 8, 2);
    const RfBox b = rf_box(spec, 3, 2);
    EXPECT_EQ(b.f.size(), max_rf(spec).f);
    EXPECT_EQ(b.t.size(), max_rf(spec).t);
    // Neighbouring units are one total stride apart.
    EXPECT_EQ(rf_box(spec, 4, 2).f.lo - b.f.lo, 16);
  }
}

TEST(FeatureExtent, MatchesNetwork) {
  const auto spec = arch::make_network(arch::Rho(2), Variant::Plain, 3, 2, 1);
  auto net = model::Network<double>::init(spec, 1);
  const auto f = net.forward_features(testing::random_tensor<double>({1, 1, 80, 48}, 2));
  const auto e = feature_extent(spec, 80, 48);
  EXPECT_EQ(static_cast<long>(f.freq()), e[0]);
  EXPECT_EQ(static_cast<long>(f.time()), e[1]);
}

class Containment : public ::testing::TestWithParam<int> {};

TEST_P(Containment, GradientSupportInsideBox) {
  const auto spec = arch::make_network(arch::Rho(GetParam()), Variant::Plain, 3, 2, 1);
  auto net = model::Network<double>::init(spec, 3);
  net.set_mode(nn::Mode::Eval);
  const EmpiricalRf e = empirical_rf(net, testing::random_tensor<double>({1, 1, 128, 128}, 4));
  EXPECT_GT(e.mask.count(), 0);
  EXPECT_TRUE(e.mask.contained_in(e.box));
}

INSTANTIATE_TEST_SUITE_P(Rhos, Containment, ::testing::Values(0, 2, 5));

class Fill : public ::testing::TestWithParam<int> {};

TEST_P(Fill, AveragePoolingPositiveWeightsFillBox) {
  const auto spec = arch::make_network(arch::Rho(GetParam()), Variant::Plain, 3, 2, 1);
  auto net = model::Network<double>::init(spec, 5, {model::PoolKind::Avg, model::ShakeMode::Shake});
  for (auto& p : net.parameters()) {
    for (auto& v : p.value) v = std::abs(v) + 0.01;
  }
  net.set_mode(nn::Mode::Eval);
  const auto probe = testing::random_tensor<double>({1, 1, 96, 96}, 6, 0.1, 1.0);
  const EmpiricalRf e = empirical_rf(net, probe);
  EXPECT_TRUE(e.mask.fills(e.box));
  EXPECT_EQ(e.box.f.size(), kPublishedMaxRf[static_cast<size_t>(GetParam())]);

  // Positive homogeneity: scaling the probe leaves the mask unchanged.
  auto probe10 = probe;
  for (auto& v : probe10.values()) v *= 10.0;
  const EmpiricalRf scaled = empirical_rf(net, probe10);
  EXPECT_EQ(scaled.mask.bits, e.mask.bits);
}

INSTANTIATE_TEST_SUITE_P(Rhos, Fill, ::testing::Values(0, 2));

}  // namespace
}  // namespace rfcnn::rf
