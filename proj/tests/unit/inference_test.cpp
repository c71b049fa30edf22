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

#include "privedge/audit.hpp"
#include "privedge/harness.hpp"
#include "privedge/inference.hpp"
#include "privedge/oracle.hpp"
#include "privedge/sharing.hpp"
#include "privedge/garbled/ot.hpp"
#include "test_util.hpp"

namespace privedge::inference {
namespace {

LoopbackOptions fast_options(std::uint64_t seed) {
  LoopbackOptions o;
  o.predict.protocol.ot = {gc::OtMode::kExtension, 512};
  o.predict.seed = seed;
  return o;
}

std::vector<model::Model> random_models(std::size_t n, Rng& rng, bool bias = false) {
  std::vector<model::Model> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto spec = model::desk_spec("user" + std::to_string(i + 1), {}, bias);
    out.push_back(model::make_model(spec, model::random_weights(spec, rng)));
  }
  return out;
}

TEST(Inference, DeskModelsMatchLockstepOracle) {
  SeededRng rng(11);
  auto models = random_models(3, rng);
  auto image = harness::random_image(models[0].spec, rng);
  auto sc = harness::make_scenario(std::move(models), image, "user1", 1e9, {}, rng);
  std::vector<TruncationTape> tapes(3);
  auto opt = fast_options(5);
  opt.predict.tapes = &tapes;
  const auto run = run_loopback(sc.inputs(), opt);
  ASSERT_TRUE(run.ok());
  const auto want = oracle::oracle_predict(sc.oracle_models(), sc.image, sc.global_tau_word(),
                                           "user1", oracle::TruncMode::kLockstep, &tapes);
  for (auto& t : tapes) EXPECT_TRUE(t.exhausted());
  EXPECT_EQ(run.s1->index, want.argmin);
  EXPECT_EQ(run.s2->index, want.argmin);
  EXPECT_TRUE(run.s1->flag);
  EXPECT_EQ(run.s1->result, want.result);
  EXPECT_EQ(run.s2->result, want.result);
}

TEST(Inference, TrafficMatchesAnalyticModel) {
  SeededRng rng(12);
  auto models = random_models(2, rng);
  auto image = harness::random_image(models[0].spec, rng);
  auto sc = harness::make_scenario(std::move(models), image, "user2", 0.5, {}, rng);
  const auto opt = fast_options(6);
  const auto run = run_loopback(sc.inputs(), opt);
  ASSERT_TRUE(run.ok());
  const auto want = analytic_traffic({sc.models[0].spec, sc.models[1].spec}, opt.predict.protocol);
  EXPECT_EQ(run.s1_bytes, want.s1_bytes);
  EXPECT_EQ(run.s2_bytes, want.s2_bytes);
  EXPECT_EQ(run.s1_frames, want.s1_frames);
  EXPECT_EQ(run.s2_frames, want.s2_frames);
  std::size_t c1 = 0, c2 = 0;
  for (auto& [a, b] : sc.triples) {
    c1 += a.consumed();
    c2 += b.consumed();
  }
  EXPECT_EQ(c1, want.triples);
  EXPECT_EQ(c2, want.triples);
  EXPECT_EQ(want.triples, 2u * 7u);
}


// Both parties' halves of one model's reconstruction over a fresh duo.
std::pair<ShareTensor, ShareTensor> reconstruct_pair(const model::Model& m, const RingTensor& image,
                                                     Rng& rng) {
  const auto [w1, w2] = model::share_weights(m, rng);
  auto [t1, t2] = deal_triples(model::triple_plan(m.spec), 1, m.spec.params, rng);
  const auto [x1, x2] = sharing::share(image, rng, {7, 0});
  auto duo = testing::make_duo({7, 0});
  SeededRng r1(71), r2(72);
  const gc::OtConfig ot{gc::OtMode::kExtension, 512};
  auto sender = gc::make_ot_sender(ot, r1);
  auto receiver = gc::make_ot_receiver(ot, r2);
  gc::GcContext c1{Party::kS1, duo.s1.get(), &r1, sender.get(), nullptr};
  gc::GcContext c2{Party::kS2, duo.s2.get(), &r2, nullptr, receiver.get()};
  return testing::run_both(
      *duo.s1, *duo.s2, [&] { return private_reconstruct(w1, x1, t1, c1); },
      [&] { return private_reconstruct(w2, x2, t2, c2); });
}

TEST(Reconstruct, IdentityOneByOneKernelReturnsImage) {
  model::ReconstructorSpec spec;
  spec.user_id = "id";
  spec.input_shape = {4, 4, 1};
  model::LayerSpec l;
  l.shape = {1, 1, 1, 1};
  spec.layers = {l};
  const auto m = model::make_model(spec, {model::FloatLayer{{1.0}, {}}});
  SeededRng rng(73);
  const auto image = harness::random_image(spec, rng);
  auto [a, b] = reconstruct_pair(m, image, rng);
  EXPECT_EQ(sharing::reconstruct(a, b), image);
}

TEST(Reconstruct, ZeroImageThroughBiasFreeModelIsZero) {
  const auto spec = model::desk_spec("z");
  SeededRng rng(74);
  const auto m = model::make_model(spec, model::random_weights(spec, rng));
  const auto zero = RingTensor::zeros(spec.params, spec.input_shape);
  auto [a, b] = reconstruct_pair(m, zero, rng);
  EXPECT_EQ(sharing::reconstruct(a, b), zero);
}

TEST(Reconstruct, DeskModelMatchesLockstepOracleLayerOutput) {
  const auto spec = model::desk_spec("d", {}, true);
  SeededRng rng(75);
  const auto m = model::make_model(spec, model::random_weights(spec, rng));
  const auto image = harness::random_image(spec, rng);
  auto [a, b] = reconstruct_pair(m, image, rng);
  const auto canon = oracle::oracle_forward(spec, m.weights, image).layers.back();
  const auto got = sharing::reconstruct(a, b);
  // Share-wise truncation may differ from the exact shift by one ulp per
  // layer; the lockstep comparison lives in the end-to-end tests.
  for (std::size_t i = 0; i < got.size(); ++i) {
    const auto d = ring::to_signed(ring::sub(got.data[i], canon.data[i], spec.params), spec.params);
    ASSERT_LE(std::abs(d), 64) << i;
  }
}

std::pair<ShareTensor, ShareTensor> dissimilarity_pair(const RingTensor& x, const RingTensor& xbar,
                                                       Rng& rng) {
  const auto [x1, x2] = sharing::share(x, rng, {7, 0});
  const auto [y1, y2] = sharing::share(xbar, rng, {7, 0});
  auto [t1, t2] = deal_triples({TripleShape::elementwise(static_cast<std::uint32_t>(x.size()))}, 1,
                               x.params, rng);
  auto duo = testing::make_duo({7, 0});
  return testing::run_both(
      *duo.s1, *duo.s2, [&] { return secure_dissimilarity(x1, y1, t1, *duo.s1); },
      [&] { return secure_dissimilarity(x2, y2, t2, *duo.s2); });
}

TEST(Dissimilarity, EqualInputsGiveZero) {
  SeededRng rng(76);
  const RingParams p{};
  const auto x = RingTensor::encode(p, {8, 8, 1}, std::vector<double>(64, 0.3));
  auto [a, b] = dissimilarity_pair(x, x, rng);
  EXPECT_EQ(sharing::reconstruct(a, b).data, (std::vector<Word>{0}));
}

TEST(Dissimilarity, HalfDifferenceGivesQuarter) {
  SeededRng rng(77);
  const RingParams p{};
  auto [a, b] = dissimilarity_pair(RingTensor::encode(p, {1}, {0.75}),
                                   RingTensor::encode(p, {1}, {0.25}), rng);
  EXPECT_EQ(decode({sharing::reconstruct(a, b).data[0]}, p), 0.25);
}

TEST(Dissimilarity, RandomPairMatchesLockstepOracle) {
  SeededRng rng(78);
  const RingParams p{};
  std::vector<double> u(64), v(64);
  for (auto& e : u) e = rng.next_unit();
  for (auto& e : v) e = rng.next_unit();
  const auto x = RingTensor::encode(p, {8, 8, 1}, u), xbar = RingTensor::encode(p, {8, 8, 1}, v);
  const auto [x1, x2] = sharing::share(x, rng, {7, 0});
  const auto [y1, y2] = sharing::share(xbar, rng, {7, 0});
  auto [t1, t2] = deal_triples({TripleShape::elementwise(64)}, 1, p, rng);
  auto duo = testing::make_duo({7, 0});
  TruncationTape tape;
  auto [a, b] = testing::run_both(
      *duo.s1, *duo.s2, [&] { return secure_dissimilarity(x1, y1, t1, *duo.s1, &tape); },
      [&] { return secure_dissimilarity(x2, y2, t2, *duo.s2); });
  const Word want = oracle::dissimilarity(x, xbar, {oracle::TruncMode::kLockstep, &tape});
  EXPECT_EQ(sharing::reconstruct(a, b).data[0], want);
}

std::vector<model::Model> constant_models(const std::vector<double>& levels, Rng& rng) {
  std::vector<model::Model> out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const auto spec = model::desk_spec("user" + std::to_string(i + 1), {}, true);
    out.push_back(model::make_model(spec, model::constant_weights(spec, rng, levels[i])));
  }
  return out;
}

RingTensor flat_image(double level) {
  const auto spec = model::desk_spec("x");
  return RingTensor::encode(spec.params, spec.input_shape, std::vector<double>(256, level));
}

TEST(Predict, OwnImageIsAllowed) {
  SeededRng rng(79);
  auto sc = harness::make_scenario(constant_models({0.4}, rng), flat_image(0.4), "user1", 1.0,
                                   {}, rng);
  const auto run = run_loopback(sc.inputs(), fast_options(80));
  ASSERT_TRUE(run.ok());
  ASSERT_TRUE(run.s1->result.outcome);
  EXPECT_EQ(run.s1->result.outcome_user, "user1");
  EXPECT_EQ(run.s1->result.decision, Decision::kAllow);
}

TEST(Predict, CrossUserImageIsBlocked) {
  SeededRng rng(81);
  auto sc = harness::make_scenario(constant_models({0.2, 0.5, 0.8}, rng), flat_image(0.5),
                                   "user1", 1.0, {}, rng);
  const auto run = run_loopback(sc.inputs(), fast_options(82));
  ASSERT_TRUE(run.ok());
  EXPECT_EQ(run.s1->index, 1u);
  EXPECT_EQ(run.s1->result.outcome_user, "user2");
  EXPECT_EQ(run.s1->result.decision, Decision::kBlock);
  EXPECT_EQ(run.s2->result, run.s1->result);
}

TEST(Predict, ZeroThresholdGivesNoOutcome) {
  SeededRng rng(83);
  auto models = random_models(2, rng);
  auto image = harness::random_image(models[0].spec, rng);
  auto sc = harness::make_scenario(std::move(models), image, "user2", 0.0, {}, rng);
  const auto run = run_loopback(sc.inputs(), fast_options(84));
  ASSERT_TRUE(run.ok());
  EXPECT_FALSE(run.s1->flag);
  EXPECT_FALSE(run.s1->result.outcome);
  EXPECT_EQ(run.s1->result.decision, Decision::kAllow);
}

TEST(Predict, PerUserThresholdTakesPrecedence) {
  SeededRng rng(85);
  // d for user2 is 256 * 0.01 = 2.56: the global tau admits it, user2's own does not.
  auto sc = harness::make_scenario(constant_models({0.1, 0.6}, rng), flat_image(0.5), "user1",
                                   5.0, {std::nullopt, 1.0}, rng);
  const auto run = run_loopback(sc.inputs(), fast_options(86));
  ASSERT_TRUE(run.ok());
  EXPECT_EQ(run.s1->index, 1u);
  EXPECT_FALSE(run.s1->flag);
  EXPECT_EQ(run.s1->result.decision, Decision::kAllow);
}

TEST(Predict, ParallelAndSequentialAgree) {
  SeededRng rng(87);
  auto models = random_models(3, rng, true);
  auto image = harness::random_image(models[0].spec, rng);
  SeededRng deal_a(88), deal_b(88);
  auto a = harness::make_scenario(models, image, "user3", 2.0, {}, deal_a);
  auto b = harness::make_scenario(models, image, "user3", 2.0, {}, deal_b);
  auto par = fast_options(89);
  auto seq = fast_options(89);
  seq.predict.parallel = false;
  const auto r1 = run_loopback(a.inputs(), par);
  const auto r2 = run_loopback(b.inputs(), seq);
  ASSERT_TRUE(r1.ok() && r2.ok());
  EXPECT_EQ(r1.s1->result, r2.s1->result);
  EXPECT_EQ(r1.s1->index, r2.s1->index);
  EXPECT_EQ(r1.s1->flag, r2.s1->flag);
  EXPECT_EQ(r1.s1_bytes, r2.s1_bytes);
  EXPECT_EQ(r1.s2_bytes, r2.s2_bytes);
}

TEST(Predict, MissingTriplesFailBeforeAnyTraffic) {
  SeededRng rng(90);
  auto models = random_models(2, rng);
  auto image = harness::random_image(models[0].spec, rng);
  auto sc = harness::make_scenario(std::move(models), image, "user1", 1.0, {}, rng);
  sc.triples[1].first.take(model::triple_plan(sc.models[1].spec).back());
  const auto run = run_loopback(sc.inputs(), fast_options(91));
  EXPECT_FALSE(run.ok());
  EXPECT_EQ(run.s1_error, ErrorKind::kTripleExhausted);
  EXPECT_EQ(sc.triples[0].first.consumed(), 0u);
}

}  // namespace
}  // namespace privedge::inference
