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
#include <vector>

#include "privedge/bytes.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/tensor.hpp"

namespace privedge::net {

// Tensor body: u32 rank, u32 dims..., then words of k/8 bytes each. Ring
// parameters come from the session.
void write_tensor(ByteWriter& w, const RingTensor& t);
RingTensor read_tensor(ByteReader& r, const RingParams& params);
std::size_t tensor_wire_bytes(const Shape& shape, const RingParams& params);

// Self-describing share-tensor body: u8 k, u8 f, u8 owner, then the tensor.
std::vector<std::uint8_t> encode_share_tensor(const ShareTensor& s);
ShareTensor decode_share_tensor(std::span<const std::uint8_t> body,
                                SessionId session);

void send_shares(Channel& ch, const ShareTensor& s);
ShareTensor recv_shares(Channel& ch);

}  // namespace privedge::net
