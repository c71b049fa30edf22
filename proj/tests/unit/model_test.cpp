// Copyright 2026 The PrivEdge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "privedge/io.hpp"
#include "privedge/model.hpp"
#include "test_util.hpp"

namespace privedge::model {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("privedge_model_test_" + name);
  fs::remove_all(p);
  return p;
}

// Desk topology with the six conv output channel counts replaced.
ReconstructorSpec with_channels(const std::vector<std::uint32_t>& outs) {
  ReconstructorSpec s = desk_spec("u");
  std::uint32_t cin = s.input_shape[2];
  std::size_t t = 0;
  for (auto& l : s.layers) {
    if (l.kind != LayerKind::kConv) continue;
    l.shape[2] = cin;
    l.shape[3] = outs[t++];
    cin = l.shape[3];
  }
  return s;
}

TEST(Spec, DeskSpecRoundTripsThroughJson) {
  const auto s = desk_spec("alice", {}, true);
  EXPECT_EQ(ReconstructorSpec::parse(s.to_json()), s);
  EXPECT_EQ(s.conv_count(), 6u);
  EXPECT_EQ(s.output_shape(), s.input_shape);
}

TEST(Spec, ParseRejectsMalformedManifests) {
  const std::string good = desk_spec("u").to_json();
  auto kind = [](const std::string& text) {
    return testing::error_kind_of([&] { ReconstructorSpec::parse(text); });
  };
  EXPECT_EQ(kind("{"), ErrorKind::kMalformedSpec);
  EXPECT_EQ(kind("[]"), ErrorKind::kMalformedSpec);
  auto edit = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_EQ(kind(edit("\"same\"", "\"valid\"")), ErrorKind::kMalformedSpec);
  EXPECT_EQ(kind(edit("\"conv\"", "\"dense\"")), ErrorKind::kMalformedSpec);
  EXPECT_EQ(kind(edit("\"div255\"", "\"zscore\"")), ErrorKind::kMalformedSpec);
  EXPECT_EQ(kind(edit("\"k\": 64", "\"k\": 7")), ErrorKind::kMalformedSpec);
}

TEST(Spec, ChainedChannelsAreChecked) {
  auto s = desk_spec("u");
  s.layers[1].shape[2] = 5;  // expects 4 input channels
  EXPECT_EQ(testing::error_kind_of([&] { s.feature_shapes(); }), ErrorKind::kMalformedSpec);
}

TEST(Undercomplete, DeskBottleneckAccepted) {
  const auto v = validate_undercomplete(desk_spec("u"));
  EXPECT_TRUE(v.accepted) << v.reason;
  EXPECT_EQ(v.input, 256u);
  EXPECT_EQ(v.bottleneck, 32u);  // 2x2x8
}

TEST(Undercomplete, FourByFourByFourBottleneckAccepted) {
  // 16x16x1 -> 8x8x1 -> 4x4x4 ... : a 64-element bottleneck.
  const auto v = validate_undercomplete(with_channels({1, 4, 16, 8, 4, 1}));
  EXPECT_TRUE(v.accepted) << v.reason;
  EXPECT_LT(v.bottleneck, v.input);
}

TEST(Undercomplete, BottleneckEqualToInputRejected) {
  // Every hidden map holds at least 256 elements.
  const auto v = validate_undercomplete(with_channels({4, 16, 64, 16, 4, 1}));
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.bottleneck, v.input);
}

TEST(Undercomplete, OutputShapeMismatchRejected) {
  const auto v = validate_undercomplete(with_channels({4, 8, 8, 8, 4, 2}));
  EXPECT_FALSE(v.accepted);
  EXPECT_NE(v.reason.find("output"), std::string::npos);
}

TEST(Undercomplete, ShrinkingAChannelNeverFlipsToReject) {
  SeededRng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::uint32_t> outs(6);
    for (auto& c : outs) c = 1 + static_cast<std::uint32_t>(rng.uniform(80));
    outs[5] = 1;
    if (!validate_undercomplete(with_channels(outs)).accepted) continue;
    for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
      if (outs[i] == 1) continue;
      auto smaller = outs;
      --smaller[i];
      EXPECT_TRUE(validate_undercomplete(with_channels(smaller)).accepted);
    }
  }
}

TEST(Quantize, ExamplesAndRoundTrip) {
  const auto spec = desk_spec("u", {}, true);
  SeededRng rng(32);
  auto w = random_weights(spec, rng);
  w[0].kernel[0] = 1.0;
  w[0].kernel[1] = 0.0;
  const auto ws = quantize_weights(spec, w, sha256(spec.to_json()));
  EXPECT_EQ(ws.layers[0].kernel.data[0], 65536u);
  EXPECT_EQ(ws.layers[0].kernel.data[1], 0u);
  const auto back = dequantize_weights(ws);
  for (std::size_t t = 0; t < w.size(); ++t) {
    for (std::size_t i = 0; i < w[t].kernel.size(); ++i) {
      ASSERT_LE(std::abs(back[t].kernel[i] - w[t].kernel[i]), std::ldexp(1.0, -16));
    }
  }
}

TEST(Quantize, ZeroWeightsGiveZeroTensors) {
  const auto spec = desk_spec("u");
  SeededRng rng(33);
  auto w = random_weights(spec, rng);
  for (auto& l : w) std::fill(l.kernel.begin(), l.kernel.end(), 0.0);
  for (const auto& l : quantize_weights(spec, w, {}).layers) {
    for (Word v : l.kernel.data) ASSERT_EQ(v, 0u);
  }
}

TEST(Quantize, OverflowNamesLayerAndIndex) {
  const auto spec = desk_spec("u");
  SeededRng rng(34);
  auto w = random_weights(spec, rng);
  w[2].kernel[5] = 1e15;
  try {
    quantize_weights(spec, w, {});
    FAIL() << "expected overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOverflow);
    EXPECT_NE(std::string(e.what()).find("conv 2"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("index 5"), std::string::npos) << e.what();
  }
}

TEST(ModelFiles, SaveLoadRoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto spec = desk_spec("bob", {}, true);
  SeededRng rng(35);
  const auto w = random_weights(spec, rng);
  save_model(dir, spec, w);
  const Model m = load_model(dir);
  EXPECT_EQ(m.spec, spec);
  EXPECT_EQ(m.weights.layers.size(), 6u);
  const Model want = make_model(spec, w);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_EQ(m.weights.layers[t].kernel, want.weights.layers[t].kernel);
    EXPECT_EQ(m.weights.layers[t].bias, want.weights.layers[t].bias);
  }
  fs::remove_all(dir);
}

TEST(ModelFiles, EditedManifestIsManifestMismatch) {
  const auto dir = scratch("tamper");
  const auto spec = desk_spec("carol");
  SeededRng rng(36);
  save_model(dir, spec, random_weights(spec, rng));
  auto text = io::read_text(dir / "model.json");
  text.replace(text.find("carol"), 5, "carl!");
  io::write_text(dir / "model.json", text);
  EXPECT_EQ(testing::error_kind_of([&] { load_model(dir); }), ErrorKind::kManifestMismatch);
  fs::remove_all(dir);
}

TEST(ModelFiles, TruncatedWeightsRejected) {
  const auto dir = scratch("short");
  const auto spec = desk_spec("dave");
  SeededRng rng(37);
  save_model(dir, spec, random_weights(spec, rng));
  auto bytes = io::read_bytes(dir / "weights.bin");
  bytes.resize(bytes.size() - 8);
  io::write_bytes(dir / "weights.bin", bytes);
  EXPECT_NE(testing::error_kind_of([&] { load_model(dir); }), ErrorKind::kManifestMismatch);
  fs::remove_all(dir);
}

TEST(WeightShares, ReconstructBitExactAndFilesRoundTrip) {
  const auto spec = desk_spec("erin", {}, true);
  SeededRng rng(38);
  const Model m = make_model(spec, random_weights(spec, rng));
  const auto [a, b] = share_weights(m, rng, 0.125);
  EXPECT_EQ(a.owner, Party::kS1);
  EXPECT_EQ(b.owner, Party::kS2);
  EXPECT_EQ(a.manifest_hash(), m.weights.manifest_hash);
  const WeightSet back = reconstruct_weights(a, b);
  for (std::size_t t = 0; t < 6; ++t) {
    EXPECT_EQ(back.layers[t].kernel, m.weights.layers[t].kernel);
    EXPECT_EQ(back.layers[t].bias, m.weights.layers[t].bias);
  }
  const auto dir = scratch("shares");
  save_model_shares(dir / "a.pvsb", a);
  save_model_shares(dir / "b.pvsb", b);
  const auto a2 = load_model_shares(dir / "a.pvsb");
  const auto b2 = load_model_shares(dir / "b.pvsb");
  EXPECT_EQ(a2.spec, spec);
  ASSERT_TRUE(a2.tau && b2.tau);
  EXPECT_EQ(ring::add(a2.tau->value.data[0], b2.tau->value.data[0], spec.params),
            encode(0.125, spec.params).value);
  for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(a2.kernels[t].value, a.kernels[t].value);
  // An image bundle is not a weight bundle.
  EXPECT_EQ(testing::error_kind_of([&] {
              load_tensor_share(dir / "a.pvsb", BundleKind::kImage);
            }),
            ErrorKind::kDecode);
  fs::remove_all(dir);
}

TEST(TriplePlan, DeskNeedsSixMatmulsAndOneElementwise) {
  const auto plan = triple_plan(desk_spec("u"));
  ASSERT_EQ(plan.size(), 7u);
  EXPECT_EQ(plan[0], TripleShape::matmul(64, 16, 4));  // 8x8 outputs, 4x4x1 patches
  EXPECT_EQ(plan[6], TripleShape::elementwise(256));
}

TEST(Images, PgmLoadsAsUnitInterval) {
  const auto dir = scratch("img");
  std::vector<std::uint8_t> px(256, 0);
  px[0] = 255;
  px[17] = 51;
  save_pgm(dir / "x.pgm", 16, 16, px);
  const RingParams p{};
  const auto img = load_image(dir / "x.pgm", p);
  EXPECT_EQ(img.shape, (Shape{16, 16, 1}));
  EXPECT_EQ(img.data[0], encode(1.0, p).value);
  EXPECT_EQ(img.data[17], encode(0.2, p).value);
  EXPECT_EQ(img.data[1], 0u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace privedge::model
