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
#include <string>
#include <vector>

#include "privedge/fixedpoint.hpp"

namespace privedge {

using Shape = std::vector<std::uint32_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Cleartext tensor over Z_{2^k}, row-major.
struct RingTensor {
  RingParams params;
  Shape shape;
  std::vector<Word> data;

  static RingTensor zeros(const RingParams& params, Shape shape);
  static RingTensor encode(const RingParams& params, Shape shape,
                           const std::vector<double>& values);

  std::size_t size() const { return data.size(); }
  std::vector<double> decode() const;

  friend bool operator==(const RingTensor&, const RingTensor&) = default;
};

enum class Party : std::uint8_t { kS1 = 0, kS2 = 1 };

inline int party_index(Party p) { return static_cast<int>(p); }
inline Party other(Party p) { return p == Party::kS1 ? Party::kS2 : Party::kS1; }
const char* party_name(Party p);

// 128-bit session identifier, little-endian on the wire.
struct SessionId {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  std::string hex() const;
  friend bool operator==(const SessionId&, const SessionId&) = default;
  friend auto operator<=>(const SessionId&, const SessionId&) = default;
};

// One party's additive share of a tensor.
struct ShareTensor {
  RingTensor value;
  Party owner = Party::kS1;
  SessionId session;

  const Shape& shape() const { return value.shape; }
  const RingParams& params() const { return value.params; }
  std::size_t size() const { return value.data.size(); }
};

}  // namespace privedge
