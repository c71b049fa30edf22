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
#include <span>
#include <vector>

#include "privedge/tensor.hpp"

namespace privedge::net {

enum class MessageType : std::uint8_t {
  kHello = 0x00,
  kShareTensor = 0x01,
  kMaskedOpen = 0x02,
  kGarbledCircuit = 0x03,
  kOtMessage = 0x04,
  kResult = 0x05,
  kRequest = 0x06,
  kAbort = 0x0F,
};

const char* message_type_name(MessageType t);

// Wire layout, all integers little-endian:
//   u32 length | u8 type | u128 session | u64 seq | payload
// `length` counts everything after itself. The payload is the message body
// followed by a CRC-32 over type, session, seq and body.
struct Frame {
  MessageType type = MessageType::kAbort;
  SessionId session;
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> body;
};

inline constexpr std::size_t kLengthBytes = 4;
inline constexpr std::size_t kHeaderRemainder = 1 + 16 + 8;
inline constexpr std::size_t kCrcBytes = 4;
// Wire bytes of a frame around a body of `body_bytes`.
inline constexpr std::size_t frame_wire_bytes(std::size_t body_bytes) {
  return kLengthBytes + kHeaderRemainder + body_bytes + kCrcBytes;
}
inline constexpr std::uint32_t kMaxFrameLength = 1u << 30;

std::vector<std::uint8_t> encode_frame(const Frame& frame);

// Decodes the bytes after the length prefix. Throws kDecode on a malformed
// frame or checksum mismatch.
Frame decode_frame_body(std::span<const std::uint8_t> after_length);

// Decodes one complete encoded frame (length prefix included).
Frame decode_frame(std::span<const std::uint8_t> wire);

}  // namespace privedge::net
