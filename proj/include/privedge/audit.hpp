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
#include <cstdint>

namespace privedge {

// Process-wide counters of information release. sharing::reconstruct counts
// one event per call; garbled output decoding counts every bit that is
// revealed in the clear (masked share outputs are not counted).
struct AuditCounters {
  std::uint64_t reconstructs = 0;
  std::uint64_t revealed_bits = 0;
};

class Audit {
 public:
  static Audit& instance();

  void record_reconstruct() { reconstructs_.fetch_add(1); }
  void record_revealed_bits(std::uint64_t n) { revealed_bits_.fetch_add(n); }

  AuditCounters snapshot() const {
    return {reconstructs_.load(), revealed_bits_.load()};
  }
  void reset() {
    reconstructs_ = 0;
    revealed_bits_ = 0;
  }

 private:
  std::atomic<std::uint64_t> reconstructs_{0};
  std::atomic<std::uint64_t> revealed_bits_{0};
};

}  // namespace privedge
