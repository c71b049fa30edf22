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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "privedge/beaver.hpp"
#include "privedge/garbled/protocol.hpp"
#include "privedge/model.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/net/session.hpp"
#include "privedge/result.hpp"
#include "privedge/tape.hpp"

namespace privedge::inference {

// Lane i of a prediction with session S runs on sub-session {S.lo + i + 1, S.hi};
// the final circuit runs on S itself.
SessionId lane_session(SessionId s, std::size_t lane);

// Protocol options both parties must agree on (carried in the hello).
struct ProtocolConfig {
  gc::OtConfig ot;
  gc::LreluMode lrelu = gc::LreluMode::kInCircuitShift;

  net::Hello hello(Party role, const RingParams& params,
                   const std::vector<net::ManifestHash>& manifests) const;
};

// Reconstruction of one model over one lane. Consumes one matmul triple per
// conv layer. With a tape, s1 records every share-wise truncation input.
ShareTensor private_reconstruct(const model::ModelShares& m, const ShareTensor& image,
                                TripleStore& triples, gc::GcContext& ctx);

// d = trunc(sum (x - xbar)^2): one elementwise triple, one truncation.
ShareTensor secure_dissimilarity(const ShareTensor& x, const ShareTensor& xbar,
                                 TripleStore& triples, net::Channel& channel,
                                 TruncationTape* tape = nullptr);

// One party's half of a prediction request.
struct PartyRequest {
  Party role = Party::kS1;
  SessionId session;
  std::string uploader;
  ShareTensor image;
  std::optional<ShareTensor> tau;  // global threshold share, [1]
  std::vector<const model::ModelShares*> models;
  std::vector<TripleStore*> triples;  // one store per model lane
};

struct PartyLinks {
  net::Channel* control = nullptr;
  std::vector<net::Channel*> lanes;  // one per model
};

struct PredictOptions {
  ProtocolConfig protocol;
  bool parallel = true;
  std::optional<std::uint64_t> seed;       // reproducible randomness (tests)
  std::vector<TruncationTape>* tapes = nullptr;  // s1 only, one per model
};

struct PartyOutcome {
  PredictionResult result;
  std::uint32_t index = 0;
  bool flag = false;
};

// Full private prediction for one party. Any lane failure aborts every
// channel of this party and rethrows the first error.
PartyOutcome predict(const PartyRequest& req, const PartyLinks& links,
                     const PredictOptions& opt);

// Online frames and bytes one party sends for a prediction with these specs,
// computed from the protocol structure alone.
struct TrafficModel {
  std::uint64_t s1_bytes = 0;
  std::uint64_t s2_bytes = 0;
  std::uint64_t s1_frames = 0;
  std::uint64_t s2_frames = 0;
  std::uint64_t triples = 0;  // per party
};
TrafficModel analytic_traffic(const std::vector<model::ReconstructorSpec>& specs,
                              const ProtocolConfig& cfg);

// In-process two-party run, for tests, the acceptance binary and
// `predict --local`.
struct LoopbackOptions {
  PredictOptions predict;
  std::chrono::milliseconds recv_timeout{60000};
  // Installed on every channel of the given party when set.
  std::function<std::shared_ptr<net::FrameFilter>(Party, std::size_t lane)> filter;
};

struct LoopbackRun {
  std::optional<PartyOutcome> s1;
  std::optional<PartyOutcome> s2;
  std::optional<ErrorKind> s1_error;
  std::optional<ErrorKind> s2_error;
  std::uint64_t s1_bytes = 0;
  std::uint64_t s2_bytes = 0;
  std::uint64_t s1_frames = 0;
  std::uint64_t s2_frames = 0;
  double online_ms = 0;

  bool ok() const { return s1 && s2 && !s1_error && !s2_error; }
};

struct LoopbackInputs {
  SessionId session{1, 0};
  std::string uploader;
  std::pair<ShareTensor, ShareTensor> image;
  std::optional<std::pair<ShareTensor, ShareTensor>> tau;
  std::vector<std::pair<const model::ModelShares*, const model::ModelShares*>> models;
  std::vector<std::pair<TripleStore*, TripleStore*>> triples;
};

LoopbackRun run_loopback(const LoopbackInputs& in, const LoopbackOptions& opt);

}  // namespace privedge::inference
