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

#include "privedge/linear.hpp"

#include "privedge/error.hpp"
#include "privedge/net/messages.hpp"
#include "privedge/sharing.hpp"

namespace privedge::linear {
namespace {

std::vector<Word> sub_words(const std::vector<Word>& a, const std::vector<Word>& b,
                            const RingParams& p) {
  std::vector<Word> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = ring::sub(a[i], b[i], p);
  return out;
}

// Sends this party's masks and returns the peer's. s1 speaks first so that
// large bodies never have both ends blocked in send.
std::pair<RingTensor, RingTensor> exchange_masks(const RingTensor& e,
                                                 const RingTensor& f,
                                                 Party role,
                                                 net::Channel& channel) {
  auto send = [&] {
    ByteWriter w;
    net::write_tensor(w, e);
    net::write_tensor(w, f);
    channel.send(net::MessageType::kMaskedOpen, w.take());
  };
  auto receive = [&] {
    const auto body = channel.recv(net::MessageType::kMaskedOpen);
    ByteReader r(body);
    RingTensor pe = net::read_tensor(r, e.params);
    RingTensor pf = net::read_tensor(r, f.params);
    r.expect_done();
    require(pe.shape == e.shape && pf.shape == f.shape, ErrorKind::kShapeMismatch,
            "peer masked values have unexpected shapes");
    return std::pair{std::move(pe), std::move(pf)};
  };
  if (role == Party::kS1) {
    send();
    return receive();
  }
  auto peer = receive();
  send();
  return peer;
}

}  // namespace

ConvGeometry ConvGeometry::make(const Shape& input, const Shape& kernel,
                                std::uint32_t stride) {
  require(input.size() == 3, ErrorKind::kShapeMismatch,
          "conv input must be [h, w, c], got " + shape_string(input));
  require(kernel.size() == 4, ErrorKind::kShapeMismatch,
          "conv kernel must be [kh, kw, c_in, c_out], got " + shape_string(kernel));
  require(kernel[2] == input[2], ErrorKind::kShapeMismatch,
          "kernel input channels " + std::to_string(kernel[2]) +
              " do not match input channels " + std::to_string(input[2]));
  require(stride >= 1, ErrorKind::kMalformedSpec, "stride must be at least 1");
  ConvGeometry g;
  g.in_h = input[0];
  g.in_w = input[1];
  g.in_c = input[2];
  g.k_h = kernel[0];
  g.k_w = kernel[1];
  g.out_c = kernel[3];
  g.stride = stride;
  g.out_h = (g.in_h + stride - 1) / stride;
  g.out_w = (g.in_w + stride - 1) / stride;
  const auto pad_total = [&](std::uint32_t out, std::uint32_t in, std::uint32_t k) {
    const std::int64_t need = std::int64_t{out - 1} * stride + k - in;
    return static_cast<std::uint32_t>(std::max<std::int64_t>(need, 0));
  };
  g.pad_top = pad_total(g.out_h, g.in_h, g.k_h) / 2;
  g.pad_left = pad_total(g.out_w, g.in_w, g.k_w) / 2;
  return g;
}

RingTensor im2col(const RingTensor& input, const ConvGeometry& g) {
  require(input.shape == Shape{g.in_h, g.in_w, g.in_c}, ErrorKind::kShapeMismatch,
          "im2col input shape " + shape_string(input.shape));
  RingTensor out = RingTensor::zeros(input.params, {g.out_pixels(), g.patch_size()});
  for (std::uint32_t oy = 0; oy < g.out_h; ++oy) {
    for (std::uint32_t ox = 0; ox < g.out_w; ++ox) {
      Word* row = out.data.data() +
                  std::size_t{oy * g.out_w + ox} * g.patch_size();
      for (std::uint32_t ky = 0; ky < g.k_h; ++ky) {
        const std::int64_t iy = std::int64_t{oy} * g.stride + ky - g.pad_top;
        if (iy < 0 || iy >= g.in_h) continue;
        for (std::uint32_t kx = 0; kx < g.k_w; ++kx) {
          const std::int64_t ix = std::int64_t{ox} * g.stride + kx - g.pad_left;
          if (ix < 0 || ix >= g.in_w) continue;
          const Word* src = input.data.data() + (iy * g.in_w + ix) * g.in_c;
          Word* dst = row + (ky * g.k_w + kx) * g.in_c;
          std::copy_n(src, g.in_c, dst);
        }
      }
    }
  }
  return out;
}

ShareTensor secure_mul(const ShareTensor& x, const ShareTensor& w,
                       const BeaverTriple& triple, net::Channel& channel) {
  const RingParams& p = x.params();
  require(x.params() == w.params() && triple.u.params() == p,
          ErrorKind::kParamsMismatch, "secure_mul operands use different rings");
  require(x.owner == w.owner && triple.u.owner == x.owner, ErrorKind::kSessionMismatch,
          "secure_mul operands belong to different parties");
  const TripleShape& ts = triple.shape;
  if (ts.kind == TripleShape::Kind::kElementwise) {
    require(x.size() == ts.m && w.size() == ts.m, ErrorKind::kShapeMismatch,
            "elementwise operands of size " + std::to_string(x.size()) + "/" +
                std::to_string(w.size()) + " vs triple " + shape_string(ts.dims()));
  } else {
    require(x.size() == std::size_t{ts.m} * ts.n && w.size() == std::size_t{ts.n} * ts.p,
            ErrorKind::kShapeMismatch,
            "matmul operands " + shape_string(x.shape()) + " . " +
                shape_string(w.shape()) + " vs triple " + shape_string(ts.dims()));
  }

  RingTensor e{p, triple.u.shape(), sub_words(x.value.data, triple.u.value.data, p)};
  RingTensor f{p, triple.v.shape(), sub_words(w.value.data, triple.v.value.data, p)};
  auto [peer_e, peer_f] = exchange_masks(e, f, x.owner, channel);
  for (std::size_t i = 0; i < e.size(); ++i) e.data[i] = ring::add(e.data[i], peer_e.data[i], p);
  for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = ring::add(f.data[i], peer_f.data[i], p);

  ShareTensor z{RingTensor{p, {}, {}}, x.owner, x.session};
  const bool subtract_ef = x.owner == Party::kS2;
  if (ts.kind == TripleShape::Kind::kElementwise) {
    z.value.shape = x.shape();
    z.value.data.resize(ts.m);
    for (std::size_t i = 0; i < ts.m; ++i) {
      Word v = f.data[i] * x.value.data[i] + e.data[i] * w.value.data[i] +
               triple.q.value.data[i];
      if (subtract_ef) v -= e.data[i] * f.data[i];
      z.value.data[i] = v & p.mask();
    }
  } else {
    z.value.shape = {ts.m, ts.p};
    const auto xf = ring_matmul(x.value.data, f.data, ts.m, ts.n, ts.p, p);
    const auto ew = ring_matmul(e.data, w.value.data, ts.m, ts.n, ts.p, p);
    z.value.data.resize(std::size_t{ts.m} * ts.p);
    std::vector<Word> ef;
    if (subtract_ef) ef = ring_matmul(e.data, f.data, ts.m, ts.n, ts.p, p);
    for (std::size_t i = 0; i < z.value.data.size(); ++i) {
      Word v = xf[i] + ew[i] + triple.q.value.data[i];
      if (subtract_ef) v -= ef[i];
      z.value.data[i] = v & p.mask();
    }
  }
  return z;
}

ShareTensor secure_conv(const ShareTensor& x, const ShareTensor& kernel,
                        std::uint32_t stride, const BeaverTriple& triple,
                        net::Channel& channel, TruncationTape* tape,
                        const ShareTensor* bias) {
  const ConvGeometry g = ConvGeometry::make(x.shape(), kernel.shape(), stride);
  require(triple.shape == g.triple_shape(), ErrorKind::kShapeMismatch,
          "conv triple " + shape_string(triple.shape.dims()) + " does not match " +
              shape_string(g.triple_shape().dims()));
  ShareTensor patches{im2col(x.value, g), x.owner, x.session};
  ShareTensor w{RingTensor{kernel.params(), {g.patch_size(), g.out_c}, kernel.value.data},
                kernel.owner, kernel.session};
  ShareTensor z = secure_mul(patches, w, triple, channel);
  if (tape != nullptr && z.owner == Party::kS1) tape->record(z.value.data);
  z = sharing::truncate(z, x.params().f);
  z.value.shape = g.output_shape();
  if (bias != nullptr) {
    require(bias->shape() == Shape{g.out_c}, ErrorKind::kShapeMismatch,
            "bias shape " + shape_string(bias->shape()));
    const RingParams& p = x.params();
    for (std::size_t px = 0; px < g.out_pixels(); ++px) {
      for (std::size_t c = 0; c < g.out_c; ++c) {
        Word& v = z.value.data[px * g.out_c + c];
        v = ring::add(v, bias->value.data[c], p);
      }
    }
  }
  return z;
}

RingTensor upsample_nn(const RingTensor& x, std::uint32_t factor) {
  require(factor >= 1, ErrorKind::kMalformedSpec, "upsample factor must be >= 1");
  require(x.shape.size() == 3, ErrorKind::kShapeMismatch,
          "upsample input must be [h, w, c]");
  const auto h = x.shape[0], w = x.shape[1], c = x.shape[2];
  RingTensor out = RingTensor::zeros(x.params, {h * factor, w * factor, c});
  for (std::uint32_t y = 0; y < h * factor; ++y) {
    for (std::uint32_t xx = 0; xx < w * factor; ++xx) {
      const Word* src = x.data.data() + (std::size_t{y / factor} * w + xx / factor) * c;
      std::copy_n(src, c, out.data.data() + (std::size_t{y} * w * factor + xx) * c);
    }
  }
  return out;
}

ShareTensor upsample_nn(const ShareTensor& x, std::uint32_t factor) {
  return {upsample_nn(x.value, factor), x.owner, x.session};
}

std::size_t masked_open_body_bytes(const TripleShape& shape,
                                   const RingParams& params) {
  return net::tensor_wire_bytes(shape.u_shape(), params) +
         net::tensor_wire_bytes(shape.v_shape(), params);
}

}  // namespace privedge::linear
