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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "privedge/net/frame.hpp"
#include "privedge/net/stream.hpp"

namespace privedge::net {

struct ChannelStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;  // wire bytes including framing
  std::uint64_t frames_received = 0;
  std::uint64_t bytes_received = 0;
  std::map<MessageType, std::uint64_t> bytes_sent_by_type;
};

// Hook between frame encoding and the stream; returns the encoded frames to
// write in place of `frame` (empty to drop, several to duplicate or flush).
class FrameFilter {
 public:
  virtual ~FrameFilter() = default;
  virtual std::vector<std::vector<std::uint8_t>> on_send(
      std::vector<std::uint8_t> frame) = 0;
};

struct ChannelOptions {
  std::chrono::milliseconds recv_timeout{60000};
  // Sequence number of the first frame recv() expects; 1 when the caller
  // already consumed the opening frame with read_frame().
  std::uint64_t first_recv_seq = 0;
};

// One ordered session lane between two parties. Enforces session id, strictly
// consecutive sequence numbers, and frame checksums.
class Channel {
 public:
  Channel(std::unique_ptr<Stream> stream, SessionId session,
          ChannelOptions options = {});
  ~Channel();
  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void send(MessageType type, std::vector<std::uint8_t> body);
  // Receives the next frame and checks its type. An abort frame from the peer
  // raises kAborted; a checksum or layout problem raises kDecode; a skipped or
  // repeated sequence number raises kSequenceGap.
  std::vector<std::uint8_t> recv(MessageType expected);
  Frame recv_any();

  // Best-effort abort notice to the peer, then closes the stream.
  void abort(const std::string& reason) noexcept;
  void close() noexcept;
  // Closes the underlying stream without touching channel state, so another
  // thread may call it to wake a blocked owner (which then sees kChannel).
  void interrupt() noexcept;

  SessionId session() const { return session_; }
  const ChannelStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  void set_filter(std::shared_ptr<FrameFilter> filter) { filter_ = std::move(filter); }
  void set_recv_timeout(std::chrono::milliseconds t) { options_.recv_timeout = t; }

 private:
  std::unique_ptr<Stream> stream_;
  SessionId session_;
  ChannelOptions options_;
  std::uint64_t send_seq_ = 0;
  std::uint64_t recv_seq_ = 0;
  ChannelStats stats_;
  std::shared_ptr<FrameFilter> filter_;
  bool closed_ = false;
};

// Reads one raw frame off a fresh stream, before any Channel owns it.
Frame read_frame(Stream& stream, std::chrono::milliseconds timeout);

// Two connected in-process channels for the loopback harness.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>> make_channel_pair(
    SessionId session, ChannelOptions options = {});

}  // namespace privedge::net
