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

#include "privedge/linear.hpp"
#include "privedge/sharing.hpp"
#include "test_util.hpp"

namespace privedge {
namespace {

RingTensor random_tensor(const RingParams& p, Shape shape, Rng& rng, double scale = 0) {
  RingTensor t = RingTensor::zeros(p, std::move(shape));
  for (auto& w : t.data) {
    w = scale == 0 ? rng.next_word(p)
                   : encode((rng.next_unit() * 2 - 1) * scale, p).value;
  }
  return t;
}

std::pair<ShareTensor, ShareTensor> mul_pair(const RingTensor& x, const RingTensor& w,
                                             const TripleShape& shape, Rng& rng,
                                             net::Channel& c1, net::Channel& c2) {
  auto [x1, x2] = sharing::share(x, rng);
  auto [w1, w2] = sharing::share(w, rng);
  auto [t1, t2] = deal_triples({shape}, 1, x.params, rng);
  auto a = t1.take(shape), b = t2.take(shape);
  return testing::run_both(
      c1, c2, [&] { return linear::secure_mul(x1, w1, a, c1); },
      [&] { return linear::secure_mul(x2, w2, b, c2); });
}

TEST(SecureMul, ScalarGridK8) {
  const RingParams p{8, 2};
  SeededRng rng(1);
  auto duo = testing::make_duo();
  for (Word x = 0; x < 256; x += 17) {
    for (Word w = 0; w < 256; w += 13) {
      auto [z1, z2] = mul_pair(RingTensor{p, {1}, {x}}, RingTensor{p, {1}, {w}},
                               TripleShape::elementwise(1), rng, *duo.s1, *duo.s2);
      ASSERT_EQ(sharing::reconstruct(z1, z2).data[0], (x * w) & 0xFF);
    }
  }
}

TEST(SecureMul, ZeroOperand) {
  const RingParams p{64, 16};
  SeededRng rng(2);
  auto duo = testing::make_duo();
  auto [z1, z2] = mul_pair(RingTensor{p, {1}, {0}}, RingTensor{p, {1}, {rng.next_u64()}},
                           TripleShape::elementwise(1), rng, *duo.s1, *duo.s2);
  EXPECT_EQ(sharing::reconstruct(z1, z2).data[0], 0u);
}

TEST(SecureMul, MatmulMatchesRingProduct) {
  const RingParams p{64, 16};
  SeededRng rng(3);
  auto duo = testing::make_duo();
  const auto shape = TripleShape::matmul(2, 2, 2);
  for (int i = 0; i < 1000; ++i) {
    const RingTensor x = random_tensor(p, {2, 2}, rng);
    const RingTensor w = random_tensor(p, {2, 2}, rng);
    auto [z1, z2] = mul_pair(x, w, shape, rng, *duo.s1, *duo.s2);
    const Word* a = x.data.data();
    const Word* b = w.data.data();
    const std::vector<Word> expect{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
                                   a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
    ASSERT_EQ(sharing::reconstruct(z1, z2).data, expect);
  }
}

TEST(SecureMul, ElementwiseK64Statistical) {
  const RingParams p{64, 16};
  SeededRng rng(4);
  auto duo = testing::make_duo();
  const RingTensor x = random_tensor(p, {10000}, rng);
  const RingTensor w = random_tensor(p, {10000}, rng);
  auto [z1, z2] = mul_pair(x, w, TripleShape::elementwise(10000), rng, *duo.s1, *duo.s2);
  const RingTensor z = sharing::reconstruct(z1, z2);
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(z.data[i], x.data[i] * w.data[i]);
}

TEST(SecureMul, OneMessagePerParty) {
  const RingParams p{16, 4};
  SeededRng rng(5);
  auto duo = testing::make_duo();
  const auto shape = TripleShape::matmul(3, 4, 2);
  mul_pair(random_tensor(p, {3, 4}, rng), random_tensor(p, {4, 2}, rng), shape, rng,
           *duo.s1, *duo.s2);
  EXPECT_EQ(duo.s1->stats().frames_sent, 1u);
  EXPECT_EQ(duo.s2->stats().frames_sent, 1u);
  EXPECT_EQ(duo.s1->stats().bytes_sent,
            net::frame_wire_bytes(linear::masked_open_body_bytes(shape, p)));
}

TEST(SecureMul, RejectsWrongTriple) {
  const RingParams p{16, 4};
  SeededRng rng(6);
  auto duo = testing::make_duo();
  EXPECT_EQ(testing::error_kind_of([&] {
              mul_pair(random_tensor(p, {3}, rng), random_tensor(p, {3}, rng),
                       TripleShape::elementwise(4), rng, *duo.s1, *duo.s2);
            }),
            ErrorKind::kShapeMismatch);
}

// Opened masks E = X - U and F = W - V are uniform for fixed X, W.
TEST(SecureMul, OpenedMasksUniformK8) {
  const RingParams p{8, 2};
  SeededRng rng(7);
  const std::size_t n = 100000;
  const RingTensor x{p, {n}, std::vector<Word>(n, 5)};
  const RingTensor w{p, {n}, std::vector<Word>(n, 250)};
  auto [x1, x2] = sharing::share(x, rng);
  auto [w1, w2] = sharing::share(w, rng);
  const auto shape = TripleShape::elementwise(n);
  auto [t1, t2] = deal_triples({shape}, 1, p, rng);
  const auto a = t1.take(shape), b = t2.take(shape);
  std::vector<std::uint64_t> ce(256), cf(256);
  const RingTensor u = sharing::reconstruct(a.u, b.u);
  const RingTensor v = sharing::reconstruct(a.v, b.v);
  for (std::size_t i = 0; i < n; ++i) {
    ++ce[(x.data[i] - u.data[i]) & 0xFF];
    ++cf[(w.data[i] - v.data[i]) & 0xFF];
  }
  EXPECT_LT(testing::chi_square_uniform(ce), testing::kChi2Crit255);
  EXPECT_LT(testing::chi_square_uniform(cf), testing::kChi2Crit255);
}

TEST(Conv, GeometrySamePadding) {
  const auto g = linear::ConvGeometry::make({16, 16, 1}, {4, 4, 1, 4}, 2);
  EXPECT_EQ(g.output_shape(), (Shape{8, 8, 4}));
  EXPECT_EQ(g.pad_top, 1u);
  const auto odd = linear::ConvGeometry::make({5, 7, 2}, {3, 3, 2, 1}, 2);
  EXPECT_EQ(odd.output_shape(), (Shape{3, 4, 1}));
  EXPECT_EQ(testing::error_kind_of(
                [] { linear::ConvGeometry::make({4, 4, 2}, {3, 3, 1, 1}, 1); }),
            ErrorKind::kShapeMismatch);
}

// Direct-loop SAME convolution in the ring, scale 2^{2f} (no truncation).
std::vector<Word> direct_conv(const RingTensor& x, const RingTensor& k, std::uint32_t s) {
  const auto H = x.shape[0], W = x.shape[1], C = x.shape[2];
  const auto KH = k.shape[0], KW = k.shape[1], O = k.shape[3];
  const auto OH = (H + s - 1) / s, OW = (W + s - 1) / s;
  const auto pad = [](std::uint32_t out, std::uint32_t in, std::uint32_t kk, std::uint32_t st) {
    const long need = static_cast<long>((out - 1) * st + kk) - static_cast<long>(in);
    return need > 0 ? need / 2 : 0L;
  };
  const long pt = pad(OH, H, KH, s), pl = pad(OW, W, KW, s);
  std::vector<Word> out(std::size_t{OH} * OW * O, 0);
  for (std::uint32_t oy = 0; oy < OH; ++oy)
    for (std::uint32_t ox = 0; ox < OW; ++ox)
      for (std::uint32_t o = 0; o < O; ++o) {
        Word acc = 0;
        for (std::uint32_t ky = 0; ky < KH; ++ky)
          for (std::uint32_t kx = 0; kx < KW; ++kx)
            for (std::uint32_t c = 0; c < C; ++c) {
              const long iy = long{oy} * s + ky - pt, ix = long{ox} * s + kx - pl;
              if (iy < 0 || ix < 0 || iy >= H || ix >= W) continue;
              acc += x.data[(iy * W + ix) * C + c] * k.data[((ky * KW + kx) * C + c) * O + o];
            }
        out[(std::size_t{oy} * OW + ox) * O + o] = acc & x.params.mask();
      }
  return out;
}

struct ConvRun {
  RingTensor result;
  TruncationTape tape;
};

ConvRun run_conv(const RingTensor& x, const RingTensor& k, std::uint32_t stride,
                 Rng& rng, const RingTensor* bias = nullptr) {
  auto duo = testing::make_duo();
  auto [x1, x2] = sharing::share(x, rng);
  auto [k1, k2] = sharing::share(k, rng);
  const auto g = linear::ConvGeometry::make(x.shape, k.shape, stride);
  auto [t1, t2] = deal_triples({g.triple_shape()}, 1, x.params, rng);
  const auto a = t1.take(g.triple_shape()), b = t2.take(g.triple_shape());
  std::optional<std::pair<ShareTensor, ShareTensor>> bs;
  if (bias) bs = sharing::share(*bias, rng);
  ConvRun run;
  auto [z1, z2] = testing::run_both(
      *duo.s1, *duo.s2,
      [&] {
        return linear::secure_conv(x1, k1, stride, a, *duo.s1, &run.tape,
                                   bs ? &bs->first : nullptr);
      },
      [&] {
        return linear::secure_conv(x2, k2, stride, b, *duo.s2, nullptr,
                                   bs ? &bs->second : nullptr);
      });
  run.result = sharing::reconstruct(z1, z2);
  return run;
}

TEST(Conv, MatchesDirectOracleAcrossConfigs) {
  const RingParams p{64, 16};
  SeededRng rng(8);
  for (std::uint32_t stride : {1u, 2u}) {
    for (std::uint32_t ks : {1u, 3u, 4u}) {
      for (std::uint32_t c = 1; c <= 3; ++c) {
        const RingTensor x = random_tensor(p, {5, 6, c}, rng, 2.0);
        const RingTensor k = random_tensor(p, {ks, ks, c, 2}, rng, 1.0);
        ConvRun run = run_conv(x, k, stride, rng);
        const std::vector<Word> v = direct_conv(x, k, stride);
        const auto& s1 = run.tape.next();
        ASSERT_EQ(s1.size(), v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
          const Word expect = truncate_share(s1[i], 0, p.f, p) +
                              truncate_share(v[i] - s1[i], 1, p.f, p);
          ASSERT_EQ(run.result.data[i], expect) << stride << ks << c << " @" << i;
        }
        EXPECT_TRUE(run.tape.exhausted());
      }
    }
  }
}

TEST(Conv, IdentityKernelAndZeroKernel) {
  const RingParams p{64, 16};
  SeededRng rng(9);
  const RingTensor x = random_tensor(p, {4, 4, 2}, rng, 5.0);
  RingTensor id = RingTensor::zeros(p, {1, 1, 2, 2});
  id.data[0] = id.data[3] = encode(1.0, p).value;
  const RingTensor y = run_conv(x, id, 1, rng).result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto d = static_cast<std::int64_t>(y.data[i] - x.data[i]);
    EXPECT_TRUE(d >= -1 && d <= 1);
  }
  const RingTensor z = run_conv(x, RingTensor::zeros(p, {3, 3, 2, 1}), 2, rng).result;
  for (Word w : z.data) {
    const auto d = static_cast<std::int64_t>(w);
    EXPECT_TRUE(d >= -1 && d <= 1);
  }
}

TEST(Conv, BiasIsAddedPerChannel) {
  const RingParams p{64, 16};
  SeededRng rng(10);
  const RingTensor x = RingTensor::zeros(p, {2, 2, 1});
  const RingTensor k = RingTensor::zeros(p, {1, 1, 1, 2});
  const RingTensor bias = RingTensor::encode(p, {2}, {0.5, -2.0});
  const RingTensor y = run_conv(x, k, 1, rng, &bias).result;
  const auto values = y.decode();
  for (std::size_t px = 0; px < 4; ++px) {
    EXPECT_NEAR(values[px * 2], 0.5, 1e-4);
    EXPECT_NEAR(values[px * 2 + 1], -2.0, 1e-4);
  }
}

TEST(Upsample, CommutesWithReconstruction) {
  const RingParams p{64, 16};
  SeededRng rng(11);
  const RingTensor x = random_tensor(p, {4, 4, 2}, rng);
  auto [a, b] = sharing::share(x, rng);
  EXPECT_EQ(sharing::reconstruct(linear::upsample_nn(a, 2), linear::upsample_nn(b, 2)),
            linear::upsample_nn(x, 2));
  EXPECT_EQ(linear::upsample_nn(x, 1), x);
  const RingTensor one{p, {1, 1, 1}, {42}};
  EXPECT_EQ(linear::upsample_nn(one, 2).data, (std::vector<Word>{42, 42, 42, 42}));
  const RingTensor up = linear::upsample_nn(x, 2);
  EXPECT_EQ(up.shape, (Shape{8, 8, 2}));
  EXPECT_EQ(up.data[(3 * 8 + 5) * 2 + 1], x.data[(1 * 4 + 2) * 2 + 1]);
}

}  // namespace
}  // namespace privedge
