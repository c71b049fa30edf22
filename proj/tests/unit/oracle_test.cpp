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

#include <algorithm>
#include <cmath>

#include "privedge/harness.hpp"
#include "privedge/oracle.hpp"
#include "test_util.hpp"

namespace privedge::oracle {
namespace {

model::ReconstructorSpec one_layer(Shape input, Shape kernel, model::Activation act) {
  model::ReconstructorSpec s;
  s.user_id = "solo";
  s.input_shape = std::move(input);
  model::LayerSpec l;
  l.shape = std::move(kernel);
  l.activation = act;
  s.layers = {l};
  return s;
}

TEST(OracleForward, IdentityLayerReturnsInput) {
  const auto spec = one_layer({4, 4, 1}, {1, 1, 1, 1}, model::Activation::kNone);
  const auto m = model::make_model(spec, {model::FloatLayer{{1.0}, {}}});
  SeededRng rng(61);
  const auto image = harness::random_image(spec, rng);
  const auto trace = oracle_forward(spec, m.weights, image);
  ASSERT_EQ(trace.layers.size(), 1u);
  EXPECT_EQ(trace.layers[0], image);
  EXPECT_EQ(trace.dissimilarity, 0u);
}

TEST(OracleForward, LreluScalesNegativesByQuarter) {
  const auto spec = one_layer({1, 2, 1}, {1, 1, 1, 1}, model::Activation::kLrelu);
  const auto m = model::make_model(spec, {model::FloatLayer{{-1.0}, {}}});
  const auto image = RingTensor::encode(spec.params, {1, 2, 1}, {0.5, -2.0});
  const auto out = oracle_forward(spec, m.weights, image).layers[0];
  EXPECT_EQ(out.data[0], encode(-0.125, spec.params).value);
  EXPECT_EQ(out.data[1], encode(2.0, spec.params).value);
}

TEST(OracleForward, DissimilarityOfHalfIsQuarter) {
  const RingParams p{};
  const auto x = RingTensor::encode(p, {1}, {0.75});
  const auto xbar = RingTensor::encode(p, {1}, {0.25});
  EXPECT_EQ(decode({dissimilarity(x, xbar, {})}, p), 0.25);
}

TEST(OracleForward, UpsampleRepeatsPixels) {
  const RingParams p{};
  const RingTensor x{p, {1, 2, 1}, {3, 4}};
  const auto up = upsample(x, 2);
  EXPECT_EQ(up.shape, (Shape{2, 4, 1}));
  EXPECT_EQ(up.data, (std::vector<Word>{3, 3, 4, 4, 3, 3, 4, 4}));
}

// Worst-case drift of the fixed-point pass from the float pass, layer by
// layer: inherited error amplified by the kernel's column L1 norm, plus input
// magnitude times weight quantization, plus truncation, bias and L-ReLU
// rounding.
double error_bound(const model::ReconstructorSpec& spec,
                   const std::vector<model::FloatLayer>& w, double input_max) {
  const double ulp = std::ldexp(1.0, -spec.params.f);
  double err = ulp, mag = input_max;
  std::size_t t = 0;
  for (const auto& l : spec.layers) {
    if (l.kind == model::LayerKind::kUpsample) continue;
    const auto& fl = w[t++];
    const std::uint32_t co = l.shape[3];
    const std::size_t fan_in = fl.kernel.size() / co;
    double amp = 0;
    for (std::uint32_t c = 0; c < co; ++c) {
      double s = 0;
      for (std::size_t i = 0; i < fan_in; ++i) s += std::abs(fl.kernel[i * co + c]);
      amp = std::max(amp, s);
    }
    double bias_max = 0;
    for (double b : fl.bias) bias_max = std::max(bias_max, std::abs(b));
    err = amp * err + static_cast<double>(fan_in) * (mag + err) * ulp + 3 * ulp;
    mag = amp * mag + bias_max;
  }
  return err;
}

TEST(OracleForward, CanonicalModeTracksFloatPassWithinBound) {
  SeededRng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const auto spec = model::desk_spec("u", {}, trial % 2 == 0);
    const auto w = model::random_weights(spec, rng);
    const auto m = model::make_model(spec, w);
    const auto image = harness::random_image(spec, rng);
    const auto fixed = oracle_forward(spec, m.weights, image).layers.back();
    const auto ref = float_forward(spec, w, image.decode());
    const double bound = error_bound(spec, w, 1.0);
    ASSERT_EQ(fixed.size(), ref.size());
    double worst = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, std::abs(decode({fixed.data[i]}, spec.params) - ref[i]));
    }
    EXPECT_LE(worst, bound) << "trial " << trial;
    // Observed drift is a couple of ulps; the bound above is worst case.
    EXPECT_LT(worst, 16 * std::ldexp(1.0, -spec.params.f));
  }
}

TEST(OraclePredict, ArgminTiesGoToLowerIndex) {
  SeededRng rng(63);
  auto spec = model::desk_spec("a", {}, true);
  const auto w = model::constant_weights(spec, rng, 0.5);
  auto a = model::make_model(spec, w);
  spec.user_id = "b";
  auto b = model::make_model(spec, w);
  const auto image = RingTensor::encode(spec.params, spec.input_shape,
                                        std::vector<double>(256, 0.25));
  const Word tau = encode(100.0, spec.params).value;
  const auto pred = oracle_predict({{b.spec, b.weights, {}}, {a.spec, a.weights, {}}}, image,
                                   tau, "a");
  EXPECT_EQ(pred.argmin, 0u);
  ASSERT_TRUE(pred.result.outcome);
  EXPECT_EQ(pred.result.outcome_user, "b");
  EXPECT_EQ(pred.result.decision, Decision::kBlock);
}

TEST(OraclePredict, PerUserThresholdOverridesGlobal) {
  SeededRng rng(64);
  const auto spec = model::desk_spec("a", {}, true);
  const auto m = model::make_model(spec, model::constant_weights(spec, rng, 0.5));
  const auto image = RingTensor::encode(spec.params, spec.input_shape,
                                        std::vector<double>(256, 0.25));
  // d = 256 * 0.0625 = 16.
  const Word big = encode(20.0, spec.params).value, small = encode(10.0, spec.params).value;
  EXPECT_TRUE(oracle_predict({{m.spec, m.weights, {}}}, image, big, "x").flag);
  EXPECT_FALSE(oracle_predict({{m.spec, m.weights, small}}, image, big, "x").flag);
  EXPECT_TRUE(oracle_predict({{m.spec, m.weights, big}}, image, small, "x").flag);
}

}  // namespace
}  // namespace privedge::oracle
