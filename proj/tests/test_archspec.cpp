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

#include <algorithm>

#include "rfcnn/archspec.hpp"

namespace rfcnn::arch {
namespace {

TEST(Rho, Range) {
  EXPECT_NO_THROW(Rho(0));
  EXPECT_NO_THROW(Rho(22));
  EXPECT_THROW(Rho(23), std::out_of_range);
  EXPECT_THROW(Rho(-1), std::out_of_range);
}

TEST(RhoToKernels, Examples) {
  const auto k5 = rho_to_kernels(Rho(5));
  for (int i = 0; i < 22; ++i) EXPECT_EQ(k5[static_cast<size_t>(i)], i < 5 ? 3 : 1);
  for (int v : rho_to_kernels(Rho(0))) EXPECT_EQ(v, 1);
  for (int v : rho_to_kernels(Rho(22))) EXPECT_EQ(v, 3);
}

TEST(RhoToKernels, SortedWithRhoThrees) {
  for (int r = 0; r <= 22; ++r) {
    const auto k = rho_to_kernels(Rho(r));
    EXPECT_TRUE(std::is_sorted(k.rbegin(), k.rend()));
    EXPECT_EQ(std::count(k.begin(), k.end(), 3), r);
  }
}

TEST(MakeNetwork, Rho5Layout) {
  const auto s = make_network(Rho(5), Variant::Plain, 10, 128, 2);
  EXPECT_EQ(s.blocks[1].conv_a_kernel, 3);
  EXPECT_EQ(s.blocks[1].conv_b_kernel, 3);
  EXPECT_EQ(s.blocks[2].conv_a_kernel, 3);
  EXPECT_EQ(s.blocks[2].conv_b_kernel, 3);
  EXPECT_EQ(s.blocks[3].conv_a_kernel, 3);
  EXPECT_EQ(s.blocks[3].conv_b_kernel, 1);
  EXPECT_EQ(s.input_conv.kernel, (Extent2{5, 5}));
  EXPECT_EQ(s.input_conv.stride, (Extent2{2, 2}));
  EXPECT_EQ(s.input_conv.padding, (Extent2{2, 2}));
}

TEST(MakeNetwork, Rho0AllPointwise) {
  const auto s = make_network(Rho(0), Variant::Plain, 10, 8, 2);
  EXPECT_EQ(s.blocks[0].conv_a_kernel, 3);
  EXPECT_EQ(s.blocks[0].conv_b_kernel, 1);
  for (std::size_t i = 1; i < 12; ++i) {
    EXPECT_EQ(s.blocks[i].conv_a_kernel, 1);
    EXPECT_EQ(s.blocks[i].conv_b_kernel, 1);
  }
}

TEST(MakeNetwork, WidthsAndPooling) {
  const auto s = make_network(Rho(7), Variant::PreAct, 10, 3, 2);
  const int mult[12] = {1, 1, 1, 1, 2, 2, 2, 2, 4, 4, 4, 4};
  for (int i = 0; i < 12; ++i) {
    EXPECT_EQ(s.blocks[static_cast<size_t>(i)].width, 3 * mult[i]);
    EXPECT_EQ(s.blocks[static_cast<size_t>(i)].pooled, i == 0 || i == 1 || i == 3);
  }
  EXPECT_EQ(s.head.in_features, 12);
}

TEST(MakeNetwork, BlockKernelsFollowX) {
  for (int r = 0; r <= 22; ++r) {
    const auto s = make_network(Rho(r), Variant::Plain, 10, 4, 2);
    for (int i = 2; i <= 12; ++i) {
      EXPECT_EQ(s.blocks[static_cast<size_t>(i - 1)].conv_a_kernel, s.x[static_cast<size_t>(2 * i - 3 - 1)]);
      EXPECT_EQ(s.blocks[static_cast<size_t>(i - 1)].conv_b_kernel, s.x[static_cast<size_t>(2 * i - 2 - 1)]);
    }
  }
}

TEST(MakeNetwork, FreqAwareMatchesPlainGeometry) {
  const auto plain = layer_sequence(make_network(Rho(4), Variant::Plain, 10, 8, 2));
  const auto fa = layer_sequence(make_network(Rho(4), Variant::FreqAware, 10, 8, 2));
  std::vector<LayerSpec> ps, fs;
  for (const auto& l : plain) if (l.spatial()) ps.push_back(l);
  int concat = 0;
  for (const auto& l : fa) {
    if (l.kind == LayerKind::FreqConcat) ++concat;
    if (l.spatial()) fs.push_back(l);
  }
  EXPECT_EQ(concat, 24);
  ASSERT_EQ(ps.size(), fs.size());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    EXPECT_EQ(ps[i].kernel, fs[i].kernel);
    EXPECT_EQ(ps[i].stride, fs[i].stride);
    EXPECT_EQ(ps[i].padding, fs[i].padding);
    if (i > 0 && fs[i].kind == LayerKind::Conv) {
      EXPECT_EQ(fs[i].in_channels, ps[i].in_channels + 1);
    }
  }
}

TEST(SpecText, RoundTrip) {
  for (int r : {0, 5, 12}) {
    for (Variant v : {Variant::Plain, Variant::PreAct, Variant::ShakeShake, Variant::FreqAware}) {
      auto s = make_network(Rho(r), v, 7, 16, 2);
      s.freq_mode = FreqMode::Normalized;
      s.shake_level = ShakeLevel::PerBatch;
      EXPECT_EQ(parse_spec(serialize_spec(s)), s);
    }
  }
}

std::string replace_line(std::string text, const std::string& prefix, const std::string& line) {
  const auto pos = text.find("\n" + prefix);
  const auto end = text.find('\n', pos + 1);
  return text.replace(pos + 1, end - pos - 1, line);
}

TEST(SpecText, ArityErrorNamesX) {
  const std::string text = replace_line(serialize_spec(make_network(Rho(3), Variant::Plain, 10, 8, 2)),
                                        "x ", "x 3 3 3 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1");
  try {
    parse_spec(text);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("expected 22"), std::string::npos) << e.what();
  }
}

TEST(SpecText, KernelTwoRejected) {
  const std::string text = replace_line(serialize_spec(make_network(Rho(3), Variant::Plain, 10, 8, 2)),
                                        "x ", "x 3 2 3 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1 1");
  try {
    parse_spec(text);
    FAIL() << "expected SpecError";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("{1,3}"), std::string::npos) << e.what();
  }
}

TEST(SpecText, RejectsUnknownAndDuplicateFields) {
  const std::string good = serialize_spec(make_network(Rho(1), Variant::Plain, 10, 8, 2));
  EXPECT_THROW(parse_spec(replace_line(good, "variant", "flavour Plain")), SpecError);
  EXPECT_THROW(parse_spec(replace_line(good, "num_classes", "variant Plain")), SpecError);
  EXPECT_THROW(parse_spec("not a spec\n"), SpecError);
}

TEST(Validate, CatchesInconsistency) {
  auto s = make_network(Rho(3), Variant::Plain, 10, 8, 2);
  s.blocks[2].pooled = true;
  EXPECT_THROW(validate(s), SpecError);
  s = make_network(Rho(3), Variant::Plain, 10, 8, 2);
  s.blocks[1].conv_b_kernel = 1;
  EXPECT_THROW(validate(s), SpecError);
  s = make_network(Rho(3), Variant::Plain, 10, 8, 2);
  s.num_classes = 1;
  EXPECT_THROW(validate(s), SpecError);
}

TEST(Names, VariantAliases) {
  EXPECT_EQ(parse_variant("freqaware"), Variant::FreqAware);
  EXPECT_EQ(parse_variant("ShakeShake"), Variant::ShakeShake);
  EXPECT_THROW(parse_variant("densenet"), SpecError);
}

}  // namespace
}  // namespace rfcnn::arch
