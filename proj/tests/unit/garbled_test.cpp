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
#include <bit>
#include <cmath>

#include "privedge/audit.hpp"
#include "privedge/garbled/protocol.hpp"
#include "privedge/sharing.hpp"
#include "test_util.hpp"

namespace privedge::gc {
namespace {

std::vector<bool> concat(std::initializer_list<std::vector<bool>> parts) {
  std::vector<bool> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Garbles `c` once with one copy per input vector, evaluates, and decodes.
// `inputs[copy][group]` are per-copy group values in circuit order.
std::vector<std::vector<bool>> garble_eval(
    const BooleanCircuit& c, const std::vector<std::vector<std::vector<bool>>>& inputs,
    Rng& rng) {
  const auto copies = static_cast<std::uint32_t>(inputs.size());
  Garbler g(c, copies, rng);
  Evaluator e(c, copies);
  for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
    const auto& group = c.inputs()[gi];
    if (static_cast<int>(gi) == c.one_group()) {
      e.set_input(group, g.one_labels());
      continue;
    }
    std::vector<bool> values;
    for (const auto& copy : inputs) {
      values.insert(values.end(), copy[gi].begin(), copy[gi].end());
    }
    e.set_input(group, g.active_labels(group, values));
  }
  e.run(g.garbled());
  const auto bits = e.decode(g.garbled());
  const std::size_t outs = c.outputs().size();
  std::vector<std::vector<bool>> result(copies);
  for (std::uint32_t i = 0; i < copies; ++i) {
    result[i].assign(bits.begin() + i * outs, bits.begin() + (i + 1) * outs);
  }
  return result;
}

TEST(Circuit, SingleAndGateTruthTable) {
  BooleanCircuit c;
  const auto a = c.add_input("a", InputOwner::kGarbler, 1);
  const auto b = c.add_input("b", InputOwner::kEvaluator, 1);
  c.add_output(c.and_gate(a[0], b[0]));
  c.validate();
  SeededRng rng(1);
  std::vector<std::vector<std::vector<bool>>> inputs;
  for (int x = 0; x < 4; ++x) inputs.push_back({{(x & 1) != 0}, {(x & 2) != 0}});
  const auto out = garble_eval(c, inputs, rng);
  for (int x = 0; x < 4; ++x) EXPECT_EQ(out[x][0], x == 3);
}

TEST(Circuit, XorAndNotAreFree) {
  BooleanCircuit c;
  const auto a = c.add_input("a", InputOwner::kGarbler, 1);
  const auto b = c.add_input("b", InputOwner::kEvaluator, 1);
  c.add_output(c.not_gate(c.xor_gate(a[0], b[0])));
  SeededRng rng(2);
  Garbler g(c, 4, rng);
  EXPECT_EQ(c.and_count(), 0u);
  EXPECT_TRUE(g.garbled().tables.empty());
  std::vector<std::vector<std::vector<bool>>> inputs;
  for (int x = 0; x < 4; ++x) inputs.push_back({{(x & 1) != 0}, {(x & 2) != 0}});
  const auto out = garble_eval(c, inputs, rng);
  for (int x = 0; x < 4; ++x) EXPECT_EQ(out[x][0], !(((x & 1) != 0) != ((x & 2) != 0)));
}

TEST(Circuit, ValidateCatchesUndrivenOutput) {
  BooleanCircuit c;
  c.add_input("a", InputOwner::kGarbler, 2);
  c.add_output(99);
  EXPECT_EQ(testing::error_kind_of([&] { c.validate(); }), ErrorKind::kMalformedSpec);
}

// Word-level helpers against integer arithmetic, exhaustively at 5 bits.
TEST(Circuit, ArithmeticHelpersExhaustive) {
  constexpr std::uint32_t w = 5;
  BooleanCircuit c;
  const auto a = c.add_input("a", InputOwner::kGarbler, w);
  const auto b = c.add_input("b", InputOwner::kEvaluator, w);
  const auto sel = c.add_input("s", InputOwner::kEvaluator, 1);
  c.add_outputs(add(c, a, b));
  c.add_outputs(sub(c, a, b));
  c.add_output(less_than_signed(c, a, b));
  c.add_outputs(mux(c, sel[0], a, b));
  c.add_outputs(arith_shift_right(a, 2));
  c.add_outputs(constant(c, 0b10110, w));
  c.validate();
  EXPECT_EQ(c.and_count(), 4u + 4u + 5u + 5u);
  const auto sx = [](std::uint64_t v) { return static_cast<std::int64_t>(v << 59) >> 59; };
  for (std::uint64_t x = 0; x < 32; ++x) {
    for (std::uint64_t y = 0; y < 32; ++y) {
      for (int s = 0; s < 2; ++s) {
        const auto out = evaluate(c, {to_bits(x, w), to_bits(y, w), {s != 0}, {}});
        ASSERT_EQ(from_bits(out, 0, w), (x + y) & 31);
        ASSERT_EQ(from_bits(out, w, w), (x - y) & 31);
        ASSERT_EQ(out[2 * w], sx(x) < sx(y));
        ASSERT_EQ(from_bits(out, 2 * w + 1, w), s ? y : x);
        ASSERT_EQ(from_bits(out, 3 * w + 1, w), static_cast<std::uint64_t>(sx(x) >> 2) & 31);
        ASSERT_EQ(from_bits(out, 4 * w + 1, w), 0b10110u);
      }
    }
  }
}

Word lrelu_ref(Word z, std::uint32_t shift, const RingParams& p) {
  return ring::is_negative(z, p) ? ring::arith_shift(z, static_cast<int>(shift), p) : z;
}

TEST(Lrelu, CircuitExamples) {
  const RingParams p{64, 16};
  const auto c = build_lrelu_circuit(p, 2);
  c.validate();
  EXPECT_EQ(c.and_count(), 3u * 64 - 2);
  auto run = [&](double z) {
    const Word zw = encode(z, p).value;
    const Word z1 = 0x0123456789abcdefull, r = 0xfedcba9876543210ull;
    const auto out = evaluate(c, {{}, to_bits(z1, 64), to_bits(r, 64), to_bits(zw - z1, 64)});
    return decode({from_bits(out, 0, 64) + r}, p);
  };
  EXPECT_EQ(run(1.0), 1.0);
  EXPECT_EQ(run(-1.0), -0.25);
  EXPECT_EQ(run(0.0), 0.0);
  EXPECT_EQ(run(-3.5), -0.875);
}

TEST(Lrelu, GarbledMatchesCleartextK16) {
  const RingParams p{16, 4};
  const auto c = build_lrelu_circuit(p, 2);
  SeededRng rng(3);
  std::vector<std::vector<std::vector<bool>>> inputs;
  std::vector<Word> expect;
  for (int i = 0; i < 10000; ++i) {
    const Word z1 = rng.next_word(p), z2 = rng.next_word(p), r = rng.next_word(p);
    inputs.push_back({{}, to_bits(z1, 16), to_bits(r, 16), to_bits(z2, 16)});
    expect.push_back(ring::sub(lrelu_ref(ring::add(z1, z2, p), 2, p), r, p));
  }
  const auto out = garble_eval(c, inputs, rng);
  for (int i = 0; i < 10000; ++i) {
    ASSERT_EQ(from_bits(out[i], 0, 16), expect[i]);
    ASSERT_EQ(evaluate(c, inputs[i]), out[i]);
  }
}

TEST(Lrelu, LocalScaleCircuit) {
  const RingParams p{16, 4};
  const auto c = build_lrelu_circuit(p, 2, LreluMode::kLocalScale);
  SeededRng rng(4);
  for (int i = 0; i < 2000; ++i) {
    const Word z1 = rng.next_word(p), z2 = rng.next_word(p), a1 = rng.next_word(p),
               a2 = rng.next_word(p), r = rng.next_word(p);
    const auto out = evaluate(c, {{}, to_bits(z1, 16), to_bits(a1, 16), to_bits(r, 16),
                                  to_bits(z2, 16), to_bits(a2, 16)});
    const Word z = ring::add(z1, z2, p);
    const Word h = ring::is_negative(z, p) ? ring::add(a1, a2, p) : z;
    ASSERT_EQ(from_bits(out, 0, 16), ring::sub(h, r, p));
  }
}

struct Brute {
  std::uint32_t index;
  bool flag;
};

Brute brute_argmin(const std::vector<std::int64_t>& d, const std::vector<std::int64_t>& t) {
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  return {best, d[best] <= t[best]};
}

std::pair<std::uint32_t, bool> eval_argmin_clear(const RingParams& p,
                                                 const std::vector<std::int64_t>& d,
                                                 const std::vector<std::int64_t>& t,
                                                 Rng& rng) {
  const auto n = static_cast<std::uint32_t>(d.size());
  const auto c = build_argmin_threshold_circuit(n, p);
  std::vector<bool> d1, t1, d2, t2;
  const auto k = static_cast<std::uint32_t>(p.k);
  for (std::uint32_t i = 0; i < n; ++i) {
    const Word a = rng.next_word(p), b = rng.next_word(p);
    d1 = concat({d1, to_bits(a, k)});
    d2 = concat({d2, to_bits(ring::from_signed(d[i], p) - a, k)});
    t1 = concat({t1, to_bits(b, k)});
    t2 = concat({t2, to_bits(ring::from_signed(t[i], p) - b, k)});
  }
  const auto out = evaluate(c, {{}, d1, t1, d2, t2});
  const std::uint32_t ib = index_bits(n);
  EXPECT_EQ(out.size(), ib + 1);
  return {static_cast<std::uint32_t>(from_bits(out, 0, ib)), out[ib]};
}

TEST(Argmin, IndexWidth) {
  EXPECT_EQ(index_bits(1), 1u);
  EXPECT_EQ(index_bits(2), 2u);
  EXPECT_EQ(index_bits(3), 3u);
  EXPECT_EQ(index_bits(4), 3u);
  EXPECT_EQ(index_bits(5), 4u);
}

TEST(Argmin, Examples) {
  const RingParams p{32, 8};
  SeededRng rng(5);
  EXPECT_EQ(eval_argmin_clear(p, {3}, {3}, rng), std::make_pair(0u, true));
  EXPECT_EQ(eval_argmin_clear(p, {5 << 8, 2 << 8, 9 << 8}, {4 << 8, 4 << 8, 4 << 8}, rng),
            std::make_pair(1u, true));
  EXPECT_EQ(eval_argmin_clear(p, {7, 7, 7}, {1, 1, 1}, rng), std::make_pair(0u, false));
  EXPECT_EQ(eval_argmin_clear(p, {4, 2, 2, 9, 2}, {0, 0, 0, 0, 0}, rng),
            std::make_pair(1u, false));
}

TEST(Argmin, MatchesBruteForceWithTies) {
  const RingParams p{16, 4};
  SeededRng rng(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + static_cast<std::uint32_t>(rng.uniform(6));
    std::vector<std::int64_t> d(n), t(n);
    for (auto& x : d) x = static_cast<std::int64_t>(rng.uniform(8)) * 100;
    for (auto& x : t) x = static_cast<std::int64_t>(rng.uniform(9)) * 100 - 50;
    const Brute b = brute_argmin(d, t);
    const auto got = eval_argmin_clear(p, d, t, rng);
    ASSERT_EQ(got.first, b.index);
    ASSERT_EQ(got.second, b.flag);
  }
}

TEST(Argmin, AllAboveThresholdClearsFlag) {
  const RingParams p{32, 8};
  SeededRng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto n = 1 + static_cast<std::uint32_t>(rng.uniform(5));
    std::vector<std::int64_t> d(n), t(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      t[i] = static_cast<std::int64_t>(rng.uniform(1000000));
      d[i] = t[i] + 1 + static_cast<std::int64_t>(rng.uniform(1000));
    }
    ASSERT_FALSE(eval_argmin_clear(p, d, t, rng).second);
  }
}

TEST(Garbling, EvaluatorLabelsLookUniform) {
  const RingParams p{16, 4};
  const auto c = build_lrelu_circuit(p, 2);
  SeededRng rng(8);
  std::vector<std::vector<std::vector<bool>>> inputs(2000);
  for (auto& in : inputs) {
    in = {{}, to_bits(7, 16), to_bits(rng.next_word(p), 16), to_bits(100, 16)};
  }
  const auto copies = static_cast<std::uint32_t>(inputs.size());
  Garbler g(c, copies, rng);
  Evaluator e(c, copies);
  for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
    const auto& group = c.inputs()[gi];
    if (static_cast<int>(gi) == c.one_group()) {
      e.set_input(group, g.one_labels());
      continue;
    }
    std::vector<bool> values;
    for (const auto& in : inputs) values.insert(values.end(), in[gi].begin(), in[gi].end());
    e.set_input(group, g.active_labels(group, values));
  }
  e.run(g.garbled());
  std::uint64_t ones = 0, total = 0;
  for (const Label& l : e.output_labels()) {
    ones += static_cast<std::uint64_t>(std::popcount(l.lo) + std::popcount(l.hi));
    total += 128;
  }
  const double z = (static_cast<double>(ones) - total / 2.0) / std::sqrt(total / 4.0);
  EXPECT_LT(std::fabs(z), 3.3);
}

TEST(Garbling, CorruptedTablesAreDetected) {
  const RingParams p{16, 4};
  const auto c = build_lrelu_circuit(p, 2);
  SeededRng rng(9);
  Garbler g(c, 1, rng);
  GarbledCircuit bad = g.garbled();
  for (Label& l : bad.tables) l.hi ^= 0x8000;
  Evaluator e(c, 1);
  for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
    const auto& group = c.inputs()[gi];
    if (static_cast<int>(gi) == c.one_group()) {
      e.set_input(group, g.one_labels());
    } else {
      e.set_input(group, g.active_labels(group, std::vector<bool>(16, true)));
    }
  }
  e.run(bad);
  EXPECT_EQ(testing::error_kind_of([&] { e.decode(bad); }), ErrorKind::kGarbledTable);
}

std::vector<LabelPair> random_pairs(std::size_t n, Rng& rng) {
  std::vector<LabelPair> out(n);
  for (auto& p : out) p = {random_label(rng), random_label(rng)};
  return out;
}

void check_ot(const OtConfig& cfg, std::size_t n, int batches) {
  SeededRng rs(10), rr(11), data(12);
  auto duo = testing::make_duo();
  auto sender = make_ot_sender(cfg, rs);
  auto receiver = make_ot_receiver(cfg, rr);
  for (int b = 0; b < batches; ++b) {
    const auto pairs = random_pairs(n, data);
    std::vector<bool> choices(n);
    for (std::size_t i = 0; i < n; ++i) choices[i] = data.next_bit();
    auto [ok, got] = testing::run_both(
        *duo.s1, *duo.s2,
        [&] {
          sender->send(*duo.s1, pairs);
          return true;
        },
        [&] { return receiver->receive(*duo.s2, choices); });
    ASSERT_EQ(got.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_EQ(got[i], pairs[i][choices[i] ? 1 : 0]) << i;
      ASSERT_NE(got[i], pairs[i][choices[i] ? 0 : 1]) << i;
    }
  }
}

TEST(Ot, RsaRoundTrip) { check_ot({OtMode::kRsa, 512}, 1000, 1); }

TEST(Ot, ExtensionRoundTripAcrossBatches) {
  check_ot({OtMode::kExtension, 512}, 10000, 3);
  check_ot({OtMode::kExtension, 512}, 13, 2);
}

TEST(Ot, EqualMessagesTransferForEitherChoice) {
  SeededRng rs(13), rr(14);
  auto duo = testing::make_duo();
  RsaOtSender sender(512, rs);
  RsaOtReceiver receiver(rr);
  const Label g{0x1234, 0x5678};
  const std::vector<LabelPair> pairs{{g, g}, {g, g}};
  auto [ok, got] = testing::run_both(
      *duo.s1, *duo.s2,
      [&] {
        sender.send(*duo.s1, pairs);
        return true;
      },
      [&] { return receiver.receive(*duo.s2, {false, true}); });
  EXPECT_EQ(got[0], g);
  EXPECT_EQ(got[1], g);
}

TEST(Ot, KeysAreFreshAndWellFormed) {
  SeededRng a(15), b(16);
  const auto k1 = OtKeyPair::generate(512, a);
  const auto k2 = OtKeyPair::generate(512, b);
  EXPECT_EQ(k1.modulus_bits(), 512);
  EXPECT_EQ(k1.public_exponent(), 65537u);
  EXPECT_EQ(k1.modulus().size(), 64u);
  EXPECT_EQ(k1.modulus().back() >> 7, 1);
  EXPECT_NE(k1.modulus(), k2.modulus());
}

TEST(Ot, OutOfRangeBlindRejected) {
  SeededRng rs(17);
  auto duo = testing::make_duo();
  RsaOtSender sender(512, rs);
  auto [sent, err] = testing::run_both(
      *duo.s1, *duo.s2,
      [&] {
        return testing::error_kind_of([&] {
          sender.send(*duo.s1, std::vector<LabelPair>(1));
        });
      },
      [&] {
        const auto offer = duo.s2->recv(net::MessageType::kOtMessage);
        ByteWriter w;
        w.u8(2);
        w.u32(1);
        // v = N, one past the valid range.
        w.bytes(std::span(offer).subspan(7, 64));
        duo.s2->send(net::MessageType::kOtMessage, w.take());
        return 0;
      });
  EXPECT_EQ(sent, ErrorKind::kOtProtocol);
}

TEST(Ot, BatchSizeMismatchRejected) {
  SeededRng rs(18), rr(19);
  auto duo = testing::make_duo();
  RsaOtSender sender(512, rs);
  RsaOtReceiver receiver(rr);
  auto [ok, kind] = testing::run_both(
      *duo.s1, *duo.s2,
      [&] {
        try {
          sender.send(*duo.s1, std::vector<LabelPair>(3));
        } catch (const Error&) {
        }
        return true;
      },
      [&] {
        const auto kind = testing::error_kind_of(
            [&] { receiver.receive(*duo.s2, std::vector<bool>(2)); });
        duo.s2->abort("size mismatch");
        return kind;
      });
  EXPECT_EQ(kind, ErrorKind::kOtProtocol);
}

struct Parties {
  SeededRng r1{20}, r2{21};
  std::unique_ptr<OtSender> sender;
  std::unique_ptr<OtReceiver> receiver;
  testing::ChannelDuo duo = testing::make_duo();
  GcContext c1, c2;
  TruncationTape tape;

  explicit Parties(OtConfig cfg, LreluMode mode = LreluMode::kInCircuitShift) {
    sender = make_ot_sender(cfg, r1);
    receiver = make_ot_receiver(cfg, r2);
    c1 = {Party::kS1, duo.s1.get(), &r1, sender.get(), nullptr, mode, &tape};
    c2 = {Party::kS2, duo.s2.get(), &r2, nullptr, receiver.get(), mode, nullptr};
  }
};

TEST(LreluProtocol, MixedSign4x4MatchesOracleK64) {
  const RingParams p{64, 16};
  for (const OtConfig cfg : {OtConfig{OtMode::kRsa, 512}, OtConfig{OtMode::kExtension, 512}}) {
    Parties ps(cfg);
    SeededRng rng(22);
    std::vector<double> values;
    for (int i = 0; i < 16; ++i) values.push_back((i % 2 ? -1 : 1) * (0.37 * i));
    values[5] = 0.0;
    const RingTensor z = RingTensor::encode(p, {4, 4}, values);
    auto [z1, z2] = sharing::share(z, rng, {7, 0});
    auto [h1, h2] = testing::run_both(
        *ps.duo.s1, *ps.duo.s2, [&] { return eval_lrelu(z1, 2, ps.c1); },
        [&] { return eval_lrelu(z2, 2, ps.c2); });
    const RingTensor h = sharing::reconstruct(h1, h2);
    for (std::size_t i = 0; i < z.size(); ++i) {
      ASSERT_EQ(h.data[i], lrelu_ref(z.data[i], 2, p)) << i;
    }
    EXPECT_EQ(ps.duo.s1->stats().bytes_sent_by_type.at(net::MessageType::kGarbledCircuit),
              net::frame_wire_bytes(garbled_body_bytes(build_lrelu_circuit(p, 2), 16)));
  }
}

TEST(LreluProtocol, AllPositiveIsIdentityAndMaskIsFresh) {
  const RingParams p{64, 16};
  Parties ps({OtMode::kExtension, 512});
  SeededRng rng(23);
  const RingTensor z = RingTensor::encode(p, {8}, {0.5, 1, 2, 3, 4, 5, 6, 7});
  auto [z1, z2] = sharing::share(z, rng, {7, 0});
  auto [h1, h2] = testing::run_both(
      *ps.duo.s1, *ps.duo.s2, [&] { return eval_lrelu(z1, 2, ps.c1); },
      [&] { return eval_lrelu(z2, 2, ps.c2); });
  EXPECT_EQ(sharing::reconstruct(h1, h2), z);
  EXPECT_NE(h1.value.data, z1.value.data);
}

TEST(LreluProtocol, LocalScaleModeMatchesLockstepOracle) {
  const RingParams p{64, 16};
  Parties ps({OtMode::kExtension, 512}, LreluMode::kLocalScale);
  SeededRng rng(24);
  std::vector<double> values;
  for (int i = 0; i < 32; ++i) values.push_back((rng.next_unit() - 0.5) * 20);
  const RingTensor z = RingTensor::encode(p, {32}, values);
  auto [z1, z2] = sharing::share(z, rng, {7, 0});
  auto [h1, h2] = testing::run_both(
      *ps.duo.s1, *ps.duo.s2, [&] { return eval_lrelu(z1, 2, ps.c1); },
      [&] { return eval_lrelu(z2, 2, ps.c2); });
  const RingTensor h = sharing::reconstruct(h1, h2);
  const auto& s1 = ps.tape.next();
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Word scaled = truncate_share(s1[i], 0, 2, p) + truncate_share(z.data[i] - s1[i], 1, 2, p);
    const Word expect = ring::is_negative(z.data[i], p) ? scaled : z.data[i];
    ASSERT_EQ(h.data[i], expect & p.mask());
  }
}

TEST(ArgminProtocol, RevealsOnlyIndexAndFlag) {
  const RingParams p{64, 16};
  Parties ps({OtMode::kExtension, 512});
  SeededRng rng(25);
  const RingTensor d = RingTensor::encode(p, {3}, {5.0, 2.0, 9.0});
  const RingTensor tau = RingTensor::encode(p, {3}, {4.0, 4.0, 4.0});
  auto [d1, d2] = sharing::share(d, rng, {7, 0});
  auto [t1, t2] = sharing::share(tau, rng, {7, 0});
  const auto before = Audit::instance().snapshot();
  auto [r1, r2] = testing::run_both(
      *ps.duo.s1, *ps.duo.s2, [&] { return eval_argmin_threshold(d1, t1, ps.c1); },
      [&] { return eval_argmin_threshold(d2, t2, ps.c2); });
  const auto after = Audit::instance().snapshot();
  EXPECT_EQ(r1, (ArgminResult{1, true}));
  EXPECT_EQ(r2, r1);
  EXPECT_EQ(after.revealed_bits - before.revealed_bits, 2u + 2u);
  EXPECT_EQ(after.reconstructs, before.reconstructs);
}

}  // namespace
}  // namespace privedge::gc
