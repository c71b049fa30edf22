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

#include "privedge/net/channel.hpp"

#include "privedge/bytes.hpp"
#include "privedge/error.hpp"

namespace privedge::net {

Channel::Channel(std::unique_ptr<Stream> stream, SessionId session,
                 ChannelOptions options)
    : stream_(std::move(stream)),
      session_(session),
      options_(options),
      recv_seq_(options.first_recv_seq) {}

Channel::~Channel() { close(); }

void Channel::send(MessageType type, std::vector<std::uint8_t> body) {
  require(!closed_, ErrorKind::kChannel, "channel closed");
  Frame frame{type, session_, send_seq_++, std::move(body)};
  auto wire = encode_frame(frame);
  stats_.frames_sent += 1;
  stats_.bytes_sent += wire.size();
  stats_.bytes_sent_by_type[type] += wire.size();
  if (filter_) {
    for (const auto& out : filter_->on_send(std::move(wire))) stream_->write(out);
  } else {
    stream_->write(wire);
  }
}

namespace {

std::pair<Frame, std::size_t> read_raw(Stream& stream, Clock::time_point deadline) {
  std::uint8_t len_bytes[kLengthBytes];
  stream.read_exact(len_bytes, deadline);
  const std::uint32_t length = ByteReader(len_bytes).u32();
  require(length >= kHeaderRemainder + kCrcBytes && length <= kMaxFrameLength,
          ErrorKind::kDecode, "implausible frame length");
  std::vector<std::uint8_t> rest(length);
  stream.read_exact(rest, deadline);
  return {decode_frame_body(rest), kLengthBytes + length};
}

}  // namespace

Frame read_frame(Stream& stream, std::chrono::milliseconds timeout) {
  return read_raw(stream, Clock::now() + timeout).first;
}

Frame Channel::recv_any() {
  require(!closed_, ErrorKind::kChannel, "channel closed");
  auto [frame, wire] = read_raw(*stream_, Clock::now() + options_.recv_timeout);
  stats_.frames_received += 1;
  stats_.bytes_received += wire;
  require(frame.session == session_, ErrorKind::kSessionMismatch,
          "frame for session " + frame.session.hex() + " on channel " +
              session_.hex());
  if (frame.seq != recv_seq_) {
    fail(ErrorKind::kSequenceGap, "expected sequence " + std::to_string(recv_seq_) +
                                      ", got " + std::to_string(frame.seq));
  }
  ++recv_seq_;
  if (frame.type == MessageType::kAbort) {
    fail(ErrorKind::kAborted, "peer aborted: " +
                                  std::string(frame.body.begin(), frame.body.end()));
  }
  return frame;
}

std::vector<std::uint8_t> Channel::recv(MessageType expected) {
  Frame frame = recv_any();
  if (frame.type != expected) {
    fail(ErrorKind::kDecode, std::string("expected ") + message_type_name(expected) +
                                 " frame, got " + message_type_name(frame.type));
  }
  return std::move(frame.body);
}

void Channel::abort(const std::string& reason) noexcept {
  if (closed_) return;
  try {
    Frame frame{MessageType::kAbort, session_, send_seq_++,
                std::vector<std::uint8_t>(reason.begin(), reason.end())};
    stream_->write(encode_frame(frame));
  } catch (...) {
  }
  close();
}

void Channel::close() noexcept {
  if (closed_) return;
  closed_ = true;
  try {
    stream_->close();
  } catch (...) {
  }
}

void Channel::interrupt() noexcept {
  try {
    stream_->close();
  } catch (...) {
  }
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair(
    SessionId session, ChannelOptions options) {
  auto [a, b] = make_pipe_pair();
  return {std::make_unique<Channel>(std::move(a), session, options),
          std::make_unique<Channel>(std::move(b), session, options)};
}

}  // namespace privedge::net
