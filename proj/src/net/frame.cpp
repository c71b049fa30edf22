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

#include "privedge/net/frame.hpp"

#include <zlib.h>

#include "privedge/bytes.hpp"
#include "privedge/error.hpp"

namespace privedge::net {
namespace {

std::uint32_t checksum(std::span<const std::uint8_t> covered) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; frames are bounded by kMaxFrameLength.
  crc = crc32(crc, covered.data(), static_cast<uInt>(covered.size()));
  return static_cast<std::uint32_t>(crc);
}

bool known_type(std::uint8_t t) {
  return t <= 0x06 || t == 0x0F;
}

}  // namespace

const char* message_type_name(MessageType t) {
  switch (t) {
    case MessageType::kHello: return "hello";
    case MessageType::kShareTensor: return "share-tensor";
    case MessageType::kMaskedOpen: return "masked-open";
    case MessageType::kGarbledCircuit: return "garbled-circuit";
    case MessageType::kOtMessage: return "ot-msg";
    case MessageType::kResult: return "result";
    case MessageType::kRequest: return "request";
    case MessageType::kAbort: return "abort";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_frame(const Frame& frame) {
  const std::size_t length = kHeaderRemainder + frame.body.size() + kCrcBytes;
  require(length <= kMaxFrameLength, ErrorKind::kChannel, "frame too large");
  ByteWriter w;
  w.buffer().reserve(kLengthBytes + length);
  w.u32(static_cast<std::uint32_t>(length));
  w.u8(static_cast<std::uint8_t>(frame.type));
  w.u64(frame.session.lo);
  w.u64(frame.session.hi);
  w.u64(frame.seq);
  w.bytes(frame.body);
  const auto& buf = w.buffer();
  w.u32(checksum({buf.data() + kLengthBytes, buf.size() - kLengthBytes}));
  return w.take();
}

Frame decode_frame_body(std::span<const std::uint8_t> rest) {
  require(rest.size() >= kHeaderRemainder + kCrcBytes, ErrorKind::kDecode,
          "frame shorter than its header");
  const auto covered = rest.first(rest.size() - kCrcBytes);
  ByteReader crc_reader(rest.last(kCrcBytes));
  require(crc_reader.u32() == checksum(covered), ErrorKind::kDecode,
          "frame checksum mismatch");
  ByteReader r(covered);
  Frame f;
  const auto type = r.u8();
  require(known_type(type), ErrorKind::kDecode, "unknown message type");
  f.type = static_cast<MessageType>(type);
  f.session.lo = r.u64();
  f.session.hi = r.u64();
  f.seq = r.u64();
  auto body = r.bytes(r.remaining());
  f.body.assign(body.begin(), body.end());
  return f;
}

Frame decode_frame(std::span<const std::uint8_t> wire) {
  ByteReader r(wire);
  const auto length = r.u32();
  require(length == wire.size() - kLengthBytes, ErrorKind::kDecode,
          "frame length field does not match");
  return decode_frame_body(wire.subspan(kLengthBytes));
}

}  // namespace privedge::net
