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
#include <memory>
#include <optional>
#include <span>

#include "privedge/fixedpoint.hpp"

namespace privedge {

// Source of uniform random bytes. Implementations are not thread-safe; give
// each thread (or sub-session) its own instance.
class Rng {
 public:
  virtual ~Rng() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  Word next_word(const RingParams& p) { return next_u64() & p.mask(); }
  bool next_bit() { return (next_u64() & 1) != 0; }
  // Uniform in [0, bound).
  std::uint64_t uniform(std::uint64_t bound);
  // Uniform in [0, 1).
  double next_unit();
};

// OpenSSL RAND_bytes, buffered. Throws kRandomness on entropy failure.
class SecureRng final : public Rng {
 public:
  void fill(std::span<std::uint8_t> out) override;

 private:
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = buf_.size();
};

// AES-128-CTR keystream keyed by a 64-bit seed plus a stream id. Reproducible
// transcripts for tests and the loopback harness; not for production keys.
class SeededRng final : public Rng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);
  ~SeededRng() override;
  SeededRng(const SeededRng&) = delete;
  SeededRng& operator=(const SeededRng&) = delete;

  void fill(std::span<std::uint8_t> out) override;

 private:
  void refill();

  void* ctx_ = nullptr;
  std::array<std::uint8_t, 4096> buf_{};
  std::size_t pos_ = buf_.size();
};

// Seeded generator when `seed` is set, secure generator otherwise.
std::unique_ptr<Rng> make_rng(std::optional<std::uint64_t> seed,
                              std::uint64_t stream);

}  // namespace privedge
