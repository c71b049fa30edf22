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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "privedge/fixedpoint.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/tensor.hpp"

namespace privedge::net {

inline constexpr std::uint16_t kProtocolVersion = 1;

using ManifestHash = std::array<std::uint8_t, 32>;

// Body of the opening 0x00 frame each side sends on a new lane.
struct Hello {
  std::uint16_t version = kProtocolVersion;
  Party role = Party::kS1;
  RingParams params;
  std::uint8_t ot_mode = 1;
  std::uint16_t ot_bits = 2048;
  std::uint8_t lrelu_mode = 0;
  std::vector<ManifestHash> manifests;  // registered models, in order

  friend bool operator==(const Hello&, const Hello&) = default;
};

std::vector<std::uint8_t> encode_hello(const Hello& h);
// A version other than ours raises kVersionMismatch before the rest is read.
Hello decode_hello(std::span<const std::uint8_t> body);

enum class SessionState : std::uint8_t { kHandshake, kOfflineLoaded, kOnline, kDone, kAborted };
const char* session_state_name(SessionState s);

class Session {
 public:
  Session(SessionId id, Hello local, Hello peer)
      : id_(id), local_(std::move(local)), peer_(std::move(peer)) {}

  SessionId id() const { return id_; }
  Party role() const { return local_.role; }
  const RingParams& params() const { return local_.params; }
  const std::vector<ManifestHash>& manifests() const { return local_.manifests; }
  SessionState state() const { return state_; }

  // Forward-only transitions; online requires offline-loaded and abort is
  // allowed from any non-final state. Others raise kUsage.
  void advance(SessionState next);

 private:
  SessionId id_;
  Hello local_;
  Hello peer_;
  SessionState state_ = SessionState::kHandshake;
};

// Exchanges hellos (s1 sends first) and checks agreement on version, ring
// parameters, protocol options and manifest hashes. Pass `peer` when the
// peer's hello was already read off the stream. On a mismatch the channel is
// aborted and kVersionMismatch, kParamsMismatch or kManifestMismatch raised.
Session handshake(Channel& ch, const Hello& mine, const Hello* peer = nullptr);

// Raises the mismatch kind, if any, between two hellos of opposite roles.
void check_hellos(const Hello& mine, const Hello& peer);

}  // namespace privedge::net
