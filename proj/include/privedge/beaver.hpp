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

#include <compare>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "privedge/rng.hpp"
#include "privedge/tensor.hpp"

namespace privedge {

// Operation shape a triple is dealt for. Elementwise triples mask two
// length-m vectors; matmul triples mask an m x n left operand and an n x p
// right operand with Q = U V (m x p).
struct TripleShape {
  enum class Kind : std::uint8_t { kElementwise = 1, kMatmul = 3 };

  Kind kind = Kind::kElementwise;
  std::uint32_t m = 0;
  std::uint32_t n = 0;
  std::uint32_t p = 0;

  static TripleShape elementwise(std::uint32_t len) {
    return {Kind::kElementwise, len, 0, 0};
  }
  static TripleShape matmul(std::uint32_t m, std::uint32_t n, std::uint32_t p) {
    return {Kind::kMatmul, m, n, p};
  }

  Shape u_shape() const;
  Shape v_shape() const;
  Shape q_shape() const;
  // Rank-1 [len] or rank-3 [m, n, p]; the on-disk shape descriptor.
  Shape dims() const;
  static TripleShape from_dims(const Shape& dims);
  std::size_t words() const;  // u + v + q word count

  friend auto operator<=>(const TripleShape&, const TripleShape&) = default;
};

// One party's half of a multiplication triple.
struct BeaverTriple {
  TripleShape shape;
  ShareTensor u;
  ShareTensor v;
  ShareTensor q;
};

// Single-use queue of one party's triples, keyed by shape. take() is
// internally synchronized.
class TripleStore {
 public:
  TripleStore() = default;
  TripleStore(RingParams params, Party owner, SessionId session)
      : params_(params), owner_(owner), session_(session) {}
  TripleStore(TripleStore&& other) noexcept;
  TripleStore& operator=(TripleStore&& other) noexcept;

  void push(BeaverTriple triple);
  // Throws kTripleExhausted when no unconsumed triple of that shape remains.
  BeaverTriple take(const TripleShape& shape);

  std::size_t generated() const;
  std::size_t consumed() const;
  std::size_t available(const TripleShape& shape) const;

  const RingParams& params() const { return params_; }
  Party owner() const { return owner_; }
  SessionId session() const { return session_; }

  // Binary triple file: one block per shape, header
  // {"PVTR", u16 version, u8 k, u8 f, u32 rank, u32 dims..., u64 count}
  // followed by count x (u, v, q) words of k/8 bytes, little-endian.
  void save(const std::filesystem::path& path) const;
  static TripleStore load(const std::filesystem::path& path, Party owner,
                          SessionId session = {});
  // Size of the file save() would write.
  std::size_t serialized_bytes() const;

 private:
  RingParams params_;
  Party owner_ = Party::kS1;
  SessionId session_;
  mutable std::mutex mu_;
  std::map<TripleShape, std::deque<BeaverTriple>> queues_;
  std::size_t generated_ = 0;
  std::size_t consumed_ = 0;
};

struct DealOptions {
  bool force_zero_u = false;  // test hook
};

// Trusted-dealer offline phase: `count` triples for every listed shape
// (repeated shapes get repeated allotments).
std::pair<TripleStore, TripleStore> deal_triples(
    const std::vector<TripleShape>& shapes, std::size_t count,
    const RingParams& params, Rng& rng, SessionId session = {},
    DealOptions options = {});

// Cleartext ring matrix product of row-major a (m x n) and b (n x p).
std::vector<Word> ring_matmul(const std::vector<Word>& a,
                              const std::vector<Word>& b, std::size_t m,
                              std::size_t n, std::size_t p,
                              const RingParams& params);

}  // namespace privedge
