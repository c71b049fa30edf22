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

#include "privedge/server.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <set>
#include <thread>

#include "privedge/bytes.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/net/messages.hpp"
#include "privedge/net/session.hpp"

namespace privedge::server {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint8_t kClientTag = 1;
constexpr std::uint8_t kPlanTag = 2;
const SessionId kProbeSession{0, 0};

void write_blob(ByteWriter& w, const std::vector<std::uint8_t>& b) {
  w.u32(static_cast<std::uint32_t>(b.size()));
  w.bytes(b);
}

std::vector<std::uint8_t> read_blob(ByteReader& r) {
  const auto n = r.u32();
  const auto b = r.bytes(n);
  return {b.begin(), b.end()};
}

struct ClientRequest {
  std::string uploader;
  ShareTensor image;
  std::optional<ShareTensor> tau;
};

std::vector<std::uint8_t> encode_client_request(const std::string& uploader,
                                                const ShareTensor& image,
                                                const std::optional<ShareTensor>& tau) {
  ByteWriter w;
  w.u8(kClientTag);
  w.str(uploader);
  write_blob(w, net::encode_share_tensor(image));
  w.u8(tau ? 1 : 0);
  if (tau) write_blob(w, net::encode_share_tensor(*tau));
  return w.take();
}

ClientRequest decode_client_request(const std::vector<std::uint8_t>& body, SessionId sid) {
  ByteReader r(body);
  require(r.u8() == kClientTag, ErrorKind::kDecode, "not a client request");
  ClientRequest req;
  req.uploader = r.str();
  req.image = net::decode_share_tensor(read_blob(r), sid);
  if (r.u8()) req.tau = net::decode_share_tensor(read_blob(r), sid);
  r.expect_done();
  return req;
}

struct Reply {
  bool ok = false;
  PredictionResult result;
  std::uint64_t online_bytes = 0;
  std::uint64_t offline_bytes = 0;
  std::uint64_t online_us = 0;
  std::string error_kind;
  std::string message;
};

std::vector<std::uint8_t> encode_reply(const Reply& rep) {
  ByteWriter w;
  w.u8(rep.ok ? 0 : 1);
  if (rep.ok) {
    w.u8(rep.result.outcome ? 1 : 0);
    w.u32(rep.result.outcome.value_or(0));
    w.str(rep.result.outcome_user);
    w.u8(static_cast<std::uint8_t>(rep.result.decision));
    w.u64(rep.online_bytes);
    w.u64(rep.offline_bytes);
    w.u64(rep.online_us);
  } else {
    w.str(rep.error_kind);
    w.str(rep.message);
  }
  return w.take();
}

Reply decode_reply(const std::vector<std::uint8_t>& body) {
  ByteReader r(body);
  Reply rep;
  rep.ok = r.u8() == 0;
  if (rep.ok) {
    const bool has = r.u8() != 0;
    const auto idx = r.u32();
    if (has) rep.result.outcome = idx;
    rep.result.outcome_user = r.str();
    const auto d = r.u8();
    require(d <= 1, ErrorKind::kDecode, "bad decision byte");
    rep.result.decision = static_cast<Decision>(d);
    rep.online_bytes = r.u64();
    rep.offline_bytes = r.u64();
    rep.online_us = r.u64();
  } else {
    rep.error_kind = r.str();
    rep.message = r.str();
  }
  r.expect_done();
  return rep;
}

bool is_knock_on(ErrorKind k) { return k == ErrorKind::kAborted || k == ErrorKind::kChannel; }

void log_line(const std::string& s) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << s << std::endl;
}

}  // namespace

fs::path triple_session_dir(const fs::path& root, std::uint32_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "session_%04u", index);
  return root / buf;
}

fs::path triple_file(const fs::path& session_dir, const std::string& user_id) {
  return session_dir / ("model_" + user_id + ".pvtr");
}

std::vector<model::ModelShares> load_registry(const fs::path& dir, Party role) {
  require(fs::is_directory(dir), ErrorKind::kIo, "models directory " + dir.string() +
                                                     " does not exist");
  std::vector<model::ModelShares> out;
  std::set<std::string> seen;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".pvsb") continue;
    auto m = model::load_model_shares(entry.path());
    require(m.owner == role, ErrorKind::kUsage,
            entry.path().string() + " holds shares for the other server");
    const auto verdict = model::validate_undercomplete(m.spec);
    require(verdict.accepted, ErrorKind::kMalformedSpec,
            "model " + m.user_id + " rejected: " + verdict.reason);
    require(seen.insert(m.user_id).second, ErrorKind::kMalformedSpec,
            "duplicate user id " + m.user_id);
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.user_id < b.user_id; });
  if (!out.empty()) {
    for (const auto& m : out) {
      require(m.spec.params == out.front().spec.params, ErrorKind::kParamsMismatch,
              "registered models use different ring parameters");
    }
  }
  return out;
}

Server::Server(ServerConfig config) : cfg_(std::move(config)) {
  models_ = load_registry(cfg_.models_dir, cfg_.role);
  listener_ = std::make_unique<net::TcpListener>(cfg_.listen);
  if (cfg_.role == Party::kS1) {
    require(!cfg_.peer.empty(), ErrorKind::kUsage, "s1 needs the peer address of s2");
  }
  // Start after the highest index already consumed.
  if (fs::is_directory(cfg_.triples_dir)) {
    for (const auto& e : fs::directory_iterator(cfg_.triples_dir)) {
      const std::string name = e.path().filename().string();
      unsigned idx = 0;
      if (std::sscanf(name.c_str(), "session_%u.used", &idx) == 1 &&
          name.size() > 5 && name.substr(name.size() - 5) == ".used") {
        next_triple_ = std::max(next_triple_, static_cast<std::uint32_t>(idx + 1));
      }
    }
  }
}

Server::~Server() {
  stop();
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

std::uint16_t Server::port() const { return listener_->port(); }

net::Hello Server::hello() const {
  std::vector<net::ManifestHash> hashes;
  for (const auto& m : models_) hashes.push_back(m.manifest_hash());
  const RingParams params = models_.empty() ? RingParams{} : models_.front().spec.params;
  return cfg_.protocol.hello(cfg_.role, params, hashes);
}

void Server::probe_peer() {
  require(cfg_.role == Party::kS1, ErrorKind::kUsage, "only s1 probes its peer");
  net::Channel ch(net::tcp_connect(cfg_.peer, cfg_.timeout), kProbeSession,
                  {cfg_.timeout, 0});
  net::handshake(ch, hello());
  ch.close();
}

void Server::stop() {
  if (!stopping_.exchange(true)) listener_->close();
  cv_.notify_all();
}

void Server::run() {
  while (!stopping_) {
    std::unique_ptr<net::Stream> s;
    try {
      s = listener_->accept();
    } catch (const Error&) {
      break;
    }
    if (stopping_) break;
    std::lock_guard lock(mu_);
    workers_.emplace_back([this, st = std::move(s)]() mutable { handle(std::move(st)); });
  }
  std::vector<std::thread> ws;
  {
    std::lock_guard lock(mu_);
    ws.swap(workers_);
  }
  for (auto& t : ws) t.join();
}

void Server::handle(std::unique_ptr<net::Stream> stream) {
  net::Frame first;
  try {
    first = net::read_frame(*stream, cfg_.timeout);
  } catch (const Error& e) {
    log_line(std::string("connection dropped: error=") +
             std::string(error_kind_name(e.kind())));
    return;
  }
  if (first.type == net::MessageType::kRequest) {
    serve_client(std::move(stream), first);
    return;
  }
  if (cfg_.role == Party::kS2 && first.session == kProbeSession &&
      first.type == net::MessageType::kHello) {
    net::Channel ch(std::move(stream), kProbeSession, {cfg_.timeout, 1});
    try {
      const net::Hello peer = net::decode_hello(first.body);
      net::handshake(ch, hello(), &peer);
      log_line("probe from s1: ok");
    } catch (const Error& e) {
      log_line(std::string("probe from s1: error=") + std::string(error_kind_name(e.kind())) +
               " " + e.what());
    }
    return;
  }
  if (cfg_.role == Party::kS2 && (first.type == net::MessageType::kHello ||
                                  first.type == net::MessageType::kAbort)) {
    std::lock_guard lock(mu_);
    const auto now = Clock::now();
    for (auto it = parked_.begin(); it != parked_.end();) {
      it = now - it->second.since > 2 * cfg_.timeout ? parked_.erase(it) : std::next(it);
    }
    const SessionId sid = first.session;
    parked_[sid] = Parked{std::move(stream), std::move(first), now};
    cv_.notify_all();
    return;
  }
  log_line("unexpected opening frame; connection dropped");
}

Server::Parked Server::wait_parked(SessionId session) {
  std::unique_lock lock(mu_);
  const bool found = cv_.wait_for(lock, cfg_.timeout, [&] {
    return stopping_ || parked_.count(session) != 0;
  });
  if (!found || stopping_) {
    fail(ErrorKind::kChannel, "s1 never opened lane " + session.hex());
  }
  Parked p = std::move(parked_.at(session));
  parked_.erase(session);
  if (p.first.type == net::MessageType::kAbort) {
    fail(ErrorKind::kAborted,
         "peer aborted: " + std::string(p.first.body.begin(), p.first.body.end()));
  }
  return p;
}

std::uint32_t Server::claim_triple_index() {
  std::lock_guard lock(mu_);
  while (next_triple_ < 1000000 && !fs::is_directory(triple_session_dir(cfg_.triples_dir, next_triple_))) {
    // Skip gaps only if a later session exists; otherwise the supply is gone.
    bool later = false;
    if (fs::is_directory(cfg_.triples_dir)) {
      for (const auto& e : fs::directory_iterator(cfg_.triples_dir)) {
        unsigned idx = 0;
        const std::string name = e.path().filename().string();
        if (std::sscanf(name.c_str(), "session_%u", &idx) == 1 && idx > next_triple_ &&
            name.find(".used") == std::string::npos) {
          later = true;
        }
      }
    }
    if (!later) fail(ErrorKind::kTripleExhausted, "no unused triple session left");
    ++next_triple_;
  }
  return next_triple_++;
}

std::vector<TripleStore> Server::load_triples(std::uint32_t index, SessionId session,
                                              std::uint64_t& bytes) {
  const fs::path dir = triple_session_dir(cfg_.triples_dir, index);
  if (!fs::is_directory(dir)) {
    fail(ErrorKind::kTripleExhausted, "triple session " + dir.string() + " is missing");
  }
  std::vector<TripleStore> stores;
  for (std::size_t i = 0; i < models_.size(); ++i) {
    const fs::path f = triple_file(dir, models_[i].user_id);
    if (!fs::exists(f)) {
      fail(ErrorKind::kTripleExhausted, "no triples for " + models_[i].user_id + " in " +
                                            dir.string());
    }
    stores.push_back(TripleStore::load(f, cfg_.role, inference::lane_session(session, i)));
    require(stores.back().params() == models_[i].spec.params, ErrorKind::kParamsMismatch,
            f.string() + " was dealt for different ring parameters");
    bytes += stores.back().serialized_bytes();
  }
  fs::path used = dir;
  used += ".used";
  fs::rename(dir, used);
  return stores;
}

inference::PartyOutcome Server::run_s1(SessionId session, const std::string& uploader,
                                       const ShareTensor& image,
                                       const std::optional<ShareTensor>& tau,
                                       std::uint64_t& online_bytes,
                                       std::uint64_t& offline_bytes) {
  const net::ChannelOptions copt{cfg_.timeout, 0};
  std::unique_ptr<net::Channel> control;
  try {
    control = std::make_unique<net::Channel>(net::tcp_connect(cfg_.peer, cfg_.timeout),
                                             session, copt);
  } catch (const Error&) {
    throw;
  }
  net::Session sess = net::handshake(*control, hello());
  std::vector<TripleStore> stores;
  std::uint32_t index = 0;
  try {
    index = claim_triple_index();
    stores = load_triples(index, session, offline_bytes);
  } catch (const Error& e) {
    control->abort(std::string(error_kind_name(e.kind())));
    throw;
  }
  ByteWriter plan;
  plan.u8(kPlanTag);
  plan.u32(index);
  plan.str(uploader);
  control->send(net::MessageType::kRequest, plan.take());
  sess.advance(net::SessionState::kOfflineLoaded);

  std::vector<std::unique_ptr<net::Channel>> lanes;
  try {
    for (std::size_t i = 0; i < models_.size(); ++i) {
      lanes.push_back(std::make_unique<net::Channel>(
          net::tcp_connect(cfg_.peer, cfg_.timeout), inference::lane_session(session, i),
          copt));
      net::handshake(*lanes.back(), hello());
    }
  } catch (const Error& e) {
    control->abort(std::string(error_kind_name(e.kind())));
    for (auto& l : lanes) l->abort(std::string(error_kind_name(e.kind())));
    throw;
  }

  inference::PartyRequest req{Party::kS1, session, uploader, image, tau, {}, {}};
  inference::PartyLinks links{control.get(), {}};
  for (std::size_t i = 0; i < models_.size(); ++i) {
    req.models.push_back(&models_[i]);
    req.triples.push_back(&stores[i]);
    links.lanes.push_back(lanes[i].get());
  }
  inference::PredictOptions opt;
  opt.protocol = cfg_.protocol;
  if (cfg_.seed) opt.seed = *cfg_.seed ^ session.lo;
  sess.advance(net::SessionState::kOnline);
  try {
    auto out = inference::predict(req, links, opt);
    sess.advance(net::SessionState::kDone);
    online_bytes = control->stats().bytes_sent;
    for (auto& l : lanes) online_bytes += l->stats().bytes_sent;
    return out;
  } catch (const Error&) {
    sess.advance(net::SessionState::kAborted);
    throw;
  }
}

inference::PartyOutcome Server::run_s2(SessionId session, const std::string& uploader,
                                       const ShareTensor& image,
                                       const std::optional<ShareTensor>& tau,
                                       std::uint64_t& online_bytes,
                                       std::uint64_t& offline_bytes) {
  const net::ChannelOptions copt{cfg_.timeout, 1};
  Parked ctl = wait_parked(session);
  net::Channel control(std::move(ctl.stream), session, copt);
  const net::Hello peer = net::decode_hello(ctl.first.body);
  net::Session sess = net::handshake(control, hello(), &peer);
  std::vector<TripleStore> stores;
  std::vector<std::unique_ptr<net::Channel>> lanes;
  try {
    const auto body = control.recv(net::MessageType::kRequest);
    ByteReader r(body);
    require(r.u8() == kPlanTag, ErrorKind::kDecode, "expected a prediction plan");
    const auto index = r.u32();
    const std::string peer_uploader = r.str();
    r.expect_done();
    require(peer_uploader == uploader, ErrorKind::kSessionMismatch,
            "s1 and the client disagree on the uploader");
    stores = load_triples(index, session, offline_bytes);
    sess.advance(net::SessionState::kOfflineLoaded);
    for (std::size_t i = 0; i < models_.size(); ++i) {
      const SessionId sid = inference::lane_session(session, i);
      Parked p = wait_parked(sid);
      lanes.push_back(std::make_unique<net::Channel>(std::move(p.stream), sid, copt));
      const net::Hello ph = net::decode_hello(p.first.body);
      net::handshake(*lanes.back(), hello(), &ph);
    }
  } catch (const Error& e) {
    control.abort(std::string(error_kind_name(e.kind())));
    for (auto& l : lanes) l->abort(std::string(error_kind_name(e.kind())));
    throw;
  }

  inference::PartyRequest req{Party::kS2, session, uploader, image, tau, {}, {}};
  inference::PartyLinks links{&control, {}};
  for (std::size_t i = 0; i < models_.size(); ++i) {
    req.models.push_back(&models_[i]);
    req.triples.push_back(&stores[i]);
    links.lanes.push_back(lanes[i].get());
  }
  inference::PredictOptions opt;
  opt.protocol = cfg_.protocol;
  if (cfg_.seed) opt.seed = *cfg_.seed ^ session.lo;
  sess.advance(net::SessionState::kOnline);
  try {
    auto out = inference::predict(req, links, opt);
    sess.advance(net::SessionState::kDone);
    online_bytes = control.stats().bytes_sent;
    for (auto& l : lanes) online_bytes += l->stats().bytes_sent;
    return out;
  } catch (const Error&) {
    sess.advance(net::SessionState::kAborted);
    throw;
  }
}

void Server::serve_client(std::unique_ptr<net::Stream> stream, const net::Frame& first) {
  const SessionId session = first.session;
  net::Channel client(std::move(stream), session, {cfg_.timeout, 1});
  Reply rep;
  bool contacted_peer = false;
  try {
    const ClientRequest req = decode_client_request(first.body, session);
    require(!models_.empty(), ErrorKind::kUsage, "no registered models");
    require(req.image.owner == cfg_.role, ErrorKind::kUsage,
            "image share was meant for the other server");
    require(!req.tau || req.tau->owner == cfg_.role, ErrorKind::kUsage,
            "threshold share was meant for the other server");
    const auto t0 = Clock::now();
    contacted_peer = true;
    const auto out = cfg_.role == Party::kS1
                         ? run_s1(session, req.uploader, req.image, req.tau, rep.online_bytes,
                                  rep.offline_bytes)
                         : run_s2(session, req.uploader, req.image, req.tau, rep.online_bytes,
                                  rep.offline_bytes);
    rep.online_us = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - t0).count());
    rep.ok = true;
    rep.result = out.result;
    log_line(std::string("session ") + session.hex() + ": " +
             decision_name(out.result.decision));
  } catch (const Error& e) {
    rep.ok = false;
    rep.error_kind = std::string(error_kind_name(e.kind()));
    rep.message = e.what();
    log_line("session " + session.hex() + ": error=" + rep.error_kind + " " + e.what());
    if (cfg_.role == Party::kS1 && !contacted_peer) {
      // Release s2's worker waiting for this session.
      try {
        net::Channel ch(net::tcp_connect(cfg_.peer, std::chrono::milliseconds(2000)), session);
        ch.abort(rep.error_kind);
      } catch (const Error&) {
      }
    }
  }
  try {
    client.send(net::MessageType::kResult, encode_reply(rep));
  } catch (const Error&) {
  }
  client.close();
  if (cfg_.max_requests != 0 && ++finished_ >= cfg_.max_requests) stop();
}

RemoteResult remote_predict(const std::string& s1_addr, const std::string& s2_addr,
                            SessionId session, const std::string& uploader,
                            const std::pair<ShareTensor, ShareTensor>& image,
                            const std::optional<std::pair<ShareTensor, ShareTensor>>& tau,
                            std::chrono::milliseconds timeout) {
  require(image.first.owner == Party::kS1 && image.second.owner == Party::kS2,
          ErrorKind::kUsage, "image shares must be given as (s1, s2)");
  const net::ChannelOptions copt{timeout, 0};
  net::Channel c2(net::tcp_connect(s2_addr, timeout), session, copt);
  c2.send(net::MessageType::kRequest,
          encode_client_request(uploader, image.second,
                                tau ? std::optional(tau->second) : std::nullopt));
  net::Channel c1(net::tcp_connect(s1_addr, timeout), session, copt);
  c1.send(net::MessageType::kRequest,
          encode_client_request(uploader, image.first,
                                tau ? std::optional(tau->first) : std::nullopt));
  const Reply r1 = decode_reply(c1.recv(net::MessageType::kResult));
  const Reply r2 = decode_reply(c2.recv(net::MessageType::kResult));
  auto raise = [](const Reply& r) {
    const auto kind = error_kind_from_name(r.error_kind).value_or(ErrorKind::kAborted);
    fail(kind, r.message);
  };
  if (!r1.ok || !r2.ok) {
    // Report the root cause rather than the peer's knock-on abort.
    if (!r1.ok && !r2.ok) {
      const auto k1 = error_kind_from_name(r1.error_kind).value_or(ErrorKind::kAborted);
      raise(is_knock_on(k1) ? r2 : r1);
    }
    raise(r1.ok ? r2 : r1);
  }
  require(r1.result == r2.result, ErrorKind::kDecode, "servers returned different results");
  RemoteResult out;
  out.result = r1.result;
  out.session = session;
  out.online_bytes = r1.online_bytes + r2.online_bytes;
  out.offline_bytes = r1.offline_bytes + r2.offline_bytes;
  out.online_ms = static_cast<double>(std::max(r1.online_us, r2.online_us)) / 1000.0;
  return out;
}

}  // namespace privedge::server
