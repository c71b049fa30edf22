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

#include "privedge/garbled/circuit.hpp"
#include "privedge/garbled/garble.hpp"
#include "privedge/garbled/ot.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/tape.hpp"
#include "privedge/tensor.hpp"

namespace privedge::gc {

// One party's view of the garbled-circuit sub-protocols. s1 garbles and is
// the OT sender; s2 evaluates and is the OT receiver.
struct GcContext {
  Party role = Party::kS1;
  net::Channel* channel = nullptr;
  Rng* rng = nullptr;
  OtSender* ot_sender = nullptr;      // s1 only
  OtReceiver* ot_receiver = nullptr;  // s2 only
  LreluMode mode = LreluMode::kInCircuitShift;
  TruncationTape* tape = nullptr;     // local-scale mode records s1's input
};

// Elementwise L-ReLU with alpha = 2^-alpha_shift on a shared tensor, as one
// SIMD garbled circuit. s1's output share is a fresh uniform mask R'; s2's is
// the decoded H - R'.
ShareTensor eval_lrelu(const ShareTensor& z, std::uint32_t alpha_shift,
                       GcContext& ctx);

struct ArgminResult {
  std::uint32_t index = 0;
  bool flag = false;  // d_index <= tau_index

  friend bool operator==(const ArgminResult&, const ArgminResult&) = default;
};

// Secure argmin over shared dissimilarities d ([n]) with per-candidate shared
// thresholds tau ([n]). s2 decodes the (index, flag) bits, records them as
// revealed, and forwards them to s1 in a result frame.
ArgminResult eval_argmin_threshold(const ShareTensor& d, const ShareTensor& tau,
                                   GcContext& ctx);

// Body sizes, for byte accounting.
std::size_t garbled_body_bytes(const BooleanCircuit& c, std::uint32_t copies);

}  // namespace privedge::gc
