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

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "privedge/inference.hpp"
#include "privedge/model.hpp"
#include "privedge/net/stream.hpp"

namespace privedge::server {

// Triple directories hold one sub-directory per prediction,
// session_NNNN/model_<user>.pvtr; a directory is renamed to
// session_NNNN.used once loaded so it is never dealt twice.
std::filesystem::path triple_session_dir(const std::filesystem::path& root, std::uint32_t index);
std::filesystem::path triple_file(const std::filesystem::path& session_dir,
                                  const std::string& user_id);

// Loads every *.pvsb weight share in `dir`, sorted by user id. Each model
// must pass the under-complete check and belong to `role`.
std::vector<model::ModelShares> load_registry(const std::filesystem::path& dir, Party role);

struct ServerConfig {
  Party role = Party::kS1;
  std::filesystem::path models_dir;
  std::filesystem::path triples_dir;
  std::string listen = "127.0.0.1:0";
  std::string peer;  // s1: address of s2
  inference::ProtocolConfig protocol;
  std::optional<std::uint64_t> seed;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_requests = 0;  // 0 serves forever
};

// s1 accepts client requests and drives s2; s2 accepts client requests and
// peer lanes from s1 and pairs them by session id.
class Server {
 public:
  explicit Server(ServerConfig config);
  ~Server();

  std::uint16_t port() const;
  const std::vector<model::ModelShares>& models() const { return models_; }

  // s1 only: handshakes once against s2 so configuration mismatches surface
  // at start-up (kParamsMismatch, kManifestMismatch, kVersionMismatch).
  void probe_peer();

  // Accept loop; returns after stop() or once max_requests predictions ended.
  void run();
  void stop();

 private:
  struct Parked {
    std::unique_ptr<net::Stream> stream;
    net::Frame first;
    std::chrono::steady_clock::time_point since;
  };

  void handle(std::unique_ptr<net::Stream> stream);
  void serve_client(std::unique_ptr<net::Stream> stream, const net::Frame& first);
  inference::PartyOutcome run_s1(SessionId session, const std::string& uploader,
                                 const ShareTensor& image,
                                 const std::optional<ShareTensor>& tau,
                                 std::uint64_t& online_bytes, std::uint64_t& offline_bytes);
  inference::PartyOutcome run_s2(SessionId session, const std::string& uploader,
                                 const ShareTensor& image,
                                 const std::optional<ShareTensor>& tau,
                                 std::uint64_t& online_bytes, std::uint64_t& offline_bytes);
  Parked wait_parked(SessionId session);
  std::uint32_t claim_triple_index();
  std::vector<TripleStore> load_triples(std::uint32_t index, SessionId session,
                                        std::uint64_t& bytes);
  net::Hello hello() const;

  ServerConfig cfg_;
  std::vector<model::ModelShares> models_;
  std::unique_ptr<net::TcpListener> listener_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> finished_{0};

  std::mutex mu_;
  std::condition_variable cv_;
  std::map<SessionId, Parked> parked_;
  std::uint32_t next_triple_ = 0;
  std::vector<std::thread> workers_;
};

struct RemoteResult {
  PredictionResult result;
  SessionId session;
  std::uint64_t online_bytes = 0;   // both servers, sent bytes
  std::uint64_t offline_bytes = 0;  // triple material both servers consumed
  double online_ms = 0;
};

// Client side of a prediction: sends each server its shares and collects
// both answers, which must agree.
RemoteResult remote_predict(const std::string& s1_addr, const std::string& s2_addr,
                            SessionId session, const std::string& uploader,
                            const std::pair<ShareTensor, ShareTensor>& image,
                            const std::optional<std::pair<ShareTensor, ShareTensor>>& tau,
                            std::chrono::milliseconds timeout);

}  // namespace privedge::server
