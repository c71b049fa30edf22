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

#include "privedge/net/session.hpp"

#include "privedge/bytes.hpp"
#include "privedge/error.hpp"

namespace privedge::net {

std::vector<std::uint8_t> encode_hello(const Hello& h) {
  ByteWriter w;
  w.u16(h.version);
  w.u8(static_cast<std::uint8_t>(h.role));
  w.u8(static_cast<std::uint8_t>(h.params.k));
  w.u8(static_cast<std::uint8_t>(h.params.f));
  w.u8(h.ot_mode);
  w.u16(h.ot_bits);
  w.u8(h.lrelu_mode);
  w.u32(static_cast<std::uint32_t>(h.manifests.size()));
  for (const auto& m : h.manifests) w.bytes(m);
  return w.take();
}

Hello decode_hello(std::span<const std::uint8_t> body) {
  ByteReader r(body);
  Hello h;
  h.version = r.u16();
  if (h.version != kProtocolVersion) {
    fail(ErrorKind::kVersionMismatch, "peer speaks protocol version " +
                                          std::to_string(h.version) + ", we speak " +
                                          std::to_string(kProtocolVersion));
  }
  const auto role = r.u8();
  require(role <= 1, ErrorKind::kDecode, "hello: bad role");
  h.role = static_cast<Party>(role);
  h.params.k = r.u8();
  h.params.f = r.u8();
  h.ot_mode = r.u8();
  h.ot_bits = r.u16();
  h.lrelu_mode = r.u8();
  const auto n = r.u32();
  require(n <= 4096, ErrorKind::kDecode, "hello: too many manifests");
  h.manifests.resize(n);
  for (auto& m : h.manifests) {
    const auto b = r.bytes(m.size());
    std::copy(b.begin(), b.end(), m.begin());
  }
  r.expect_done();
  return h;
}

const char* session_state_name(SessionState s) {
  switch (s) {
    case SessionState::kHandshake: return "handshake";
    case SessionState::kOfflineLoaded: return "offline-loaded";
    case SessionState::kOnline: return "online";
    case SessionState::kDone: return "done";
    case SessionState::kAborted: return "aborted";
  }
  return "?";
}

void Session::advance(SessionState next) {
  const auto from = static_cast<int>(state_);
  const auto to = static_cast<int>(next);
  const bool final_state = state_ == SessionState::kDone || state_ == SessionState::kAborted;
  const bool ok = !final_state && (next == SessionState::kAborted || to == from + 1);
  if (!ok) {
    fail(ErrorKind::kUsage, std::string("session cannot move from ") +
                                session_state_name(state_) + " to " +
                                session_state_name(next));
  }
  state_ = next;
}

void check_hellos(const Hello& mine, const Hello& peer) {
  if (peer.version != mine.version) {
    fail(ErrorKind::kVersionMismatch, "protocol versions differ");
  }
  if (peer.role == mine.role) {
    fail(ErrorKind::kParamsMismatch, std::string("both endpoints claim role ") +
                                         party_name(mine.role));
  }
  if (peer.params != mine.params) {
    fail(ErrorKind::kParamsMismatch,
         "ring parameters differ: ours k=" + std::to_string(mine.params.k) +
             " f=" + std::to_string(mine.params.f) + ", peer k=" +
             std::to_string(peer.params.k) + " f=" + std::to_string(peer.params.f));
  }
  if (peer.ot_mode != mine.ot_mode || peer.ot_bits != mine.ot_bits ||
      peer.lrelu_mode != mine.lrelu_mode) {
    fail(ErrorKind::kParamsMismatch, "protocol options differ");
  }
  if (peer.manifests != mine.manifests) {
    fail(ErrorKind::kManifestMismatch, "registered model manifests differ");
  }
}

Session handshake(Channel& ch, const Hello& mine, const Hello* peer) {
  Hello theirs;
  try {
    if (peer != nullptr) {
      theirs = *peer;
      ch.send(MessageType::kHello, encode_hello(mine));
    } else if (mine.role == Party::kS1) {
      ch.send(MessageType::kHello, encode_hello(mine));
      theirs = decode_hello(ch.recv(MessageType::kHello));
    } else {
      const auto body = ch.recv(MessageType::kHello);
      ch.send(MessageType::kHello, encode_hello(mine));
      theirs = decode_hello(body);
    }
    check_hellos(mine, theirs);
  } catch (const Error& e) {
    ch.abort(std::string(error_kind_name(e.kind())));
    throw;
  }
  return Session(ch.session(), mine, theirs);
}

}  // namespace privedge::net
