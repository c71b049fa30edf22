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

#include "privedge/net/messages.hpp"

#include "privedge/error.hpp"

namespace privedge::net {

void write_tensor(ByteWriter& w, const RingTensor& t) {
  w.u32(static_cast<std::uint32_t>(t.shape.size()));
  for (auto d : t.shape) w.u32(d);
  const int width = t.params.word_bytes();
  for (Word x : t.data) w.word(x, width);
}

RingTensor read_tensor(ByteReader& r, const RingParams& params) {
  const auto rank = r.u32();
  require(rank <= 8, ErrorKind::kDecode, "tensor rank too large");
  Shape shape(rank);
  for (auto& d : shape) d = r.u32();
  const std::size_t n = shape_size(shape);
  const int width = params.word_bytes();
  require(r.remaining() / static_cast<std::size_t>(width) >= n, ErrorKind::kDecode,
          "tensor data truncated");
  RingTensor t{params, std::move(shape), {}};
  t.data.resize(n);
  for (auto& x : t.data) x = r.word(width);
  return t;
}

std::size_t tensor_wire_bytes(const Shape& shape, const RingParams& params) {
  return 4 + 4 * shape.size() +
         shape_size(shape) * static_cast<std::size_t>(params.word_bytes());
}

std::vector<std::uint8_t> encode_share_tensor(const ShareTensor& s) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(s.params().k));
  w.u8(static_cast<std::uint8_t>(s.params().f));
  w.u8(static_cast<std::uint8_t>(s.owner));
  write_tensor(w, s.value);
  return w.take();
}

ShareTensor decode_share_tensor(std::span<const std::uint8_t> body,
                                SessionId session) {
  ByteReader r(body);
  RingParams params{r.u8(), r.u8()};
  try {
    params.validate();
  } catch (const Error&) {
    fail(ErrorKind::kDecode, "share tensor carries invalid ring parameters");
  }
  const auto owner = r.u8();
  require(owner <= 1, ErrorKind::kDecode, "share tensor owner out of range");
  ShareTensor s{read_tensor(r, params), static_cast<Party>(owner), session};
  r.expect_done();
  return s;
}

void send_shares(Channel& ch, const ShareTensor& s) {
  ch.send(MessageType::kShareTensor, encode_share_tensor(s));
}

ShareTensor recv_shares(Channel& ch) {
  const auto body = ch.recv(MessageType::kShareTensor);
  return decode_share_tensor(body, ch.session());
}

}  // namespace privedge::net
