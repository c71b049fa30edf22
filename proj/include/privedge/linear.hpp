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

#pragma once

#include <cstdint>

#include "privedge/beaver.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/tape.hpp"
#include "privedge/tensor.hpp"

namespace privedge::linear {

// Geometry of a SAME-padded strided convolution over [h, w, c] inputs with
// [kh, kw, c_in, c_out] kernels.
struct ConvGeometry {
  std::uint32_t in_h = 0, in_w = 0, in_c = 0;
  std::uint32_t k_h = 0, k_w = 0, out_c = 0;
  std::uint32_t stride = 1;
  std::uint32_t out_h = 0, out_w = 0;
  std::uint32_t pad_top = 0, pad_left = 0;

  static ConvGeometry make(const Shape& input, const Shape& kernel,
                           std::uint32_t stride);
  std::uint32_t patch_size() const { return k_h * k_w * in_c; }
  std::uint32_t out_pixels() const { return out_h * out_w; }
  Shape output_shape() const { return {out_h, out_w, out_c}; }
  // Triple for the lowered product: (out_pixels x patch) . (patch x out_c).
  TripleShape triple_shape() const {
    return TripleShape::matmul(out_pixels(), patch_size(), out_c);
  }
};

// Lowers an [h, w, c] tensor to the (out_pixels x patch) patch matrix.
// Out-of-bounds taps read zero.
RingTensor im2col(const RingTensor& input, const ConvGeometry& g);

// Beaver multiplication. Elementwise when the triple is elementwise (x, w of
// equal size), matrix product x (m x n) . w (n x p) otherwise. The result is
// NOT truncated (scale 2^{2f}). One masked-open message per party.
ShareTensor secure_mul(const ShareTensor& x, const ShareTensor& w,
                       const BeaverTriple& triple, net::Channel& channel);

// im2col + secure_mul + share-wise truncation (+ optional bias shares).
// When `tape` is set, s1 records its pre-truncation share.
ShareTensor secure_conv(const ShareTensor& x, const ShareTensor& kernel,
                        std::uint32_t stride, const BeaverTriple& triple,
                        net::Channel& channel, TruncationTape* tape = nullptr,
                        const ShareTensor* bias = nullptr);

// Nearest-neighbour spatial upsampling of an [h, w, c] share. Local.
ShareTensor upsample_nn(const ShareTensor& x, std::uint32_t factor);
RingTensor upsample_nn(const RingTensor& x, std::uint32_t factor);

// Wire bytes of the masked-open body one party sends for `shape`.
std::size_t masked_open_body_bytes(const TripleShape& shape,
                                   const RingParams& params);

}  // namespace privedge::linear
