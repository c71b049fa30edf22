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
#include <cstddef>
#include <cstdint>
#include <span>

#include "privedge/bytes.hpp"
#include "privedge/rng.hpp"

namespace privedge::gc {

// 128-bit wire label. The low bit of `lo` is the point-and-permute bit.
struct Label {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  bool lsb() const { return (lo & 1) != 0; }
  Label& operator^=(const Label& o) {
    lo ^= o.lo;
    hi ^= o.hi;
    return *this;
  }
  friend Label operator^(Label a, const Label& b) { return a ^= b; }
  friend bool operator==(const Label&, const Label&) = default;
};
static_assert(sizeof(Label) == 16);

using LabelPair = std::array<Label, 2>;

inline Label select(const Label& l, bool bit) {
  const std::uint64_t m = bit ? ~std::uint64_t{0} : 0;
  return {l.lo & m, l.hi & m};
}

// Multiplication by x in GF(2^128) (x^128 + x^7 + x^2 + x + 1).
inline Label gf_double(const Label& a) {
  const std::uint64_t carry = a.hi >> 63;
  return {(a.lo << 1) ^ (carry * 0x87), (a.hi << 1) | (a.lo >> 63)};
}

Label random_label(Rng& rng);

inline void write_label(ByteWriter& w, const Label& l) {
  w.u64(l.lo);
  w.u64(l.hi);
}
inline Label read_label(ByteReader& r) {
  Label l;
  l.lo = r.u64();
  l.hi = r.u64();
  return l;
}

// AES-128 under a fixed public key, used as a random permutation pi.
// H(K) = pi(K) ^ K is the correlation-robust hash the garbling tables and the
// OT extension are built from. Not thread-safe; one instance per thread.
class FixedKeyHash {
 public:
  FixedKeyHash();
  ~FixedKeyHash();
  FixedKeyHash(const FixedKeyHash&) = delete;
  FixedKeyHash& operator=(const FixedKeyHash&) = delete;

  // out[i] = pi(in[i]) ^ in[i]; in and out may alias.
  void hash(std::span<const Label> in, std::span<Label> out);
  Label hash(const Label& in);

 private:
  void* ctx_ = nullptr;
};

// Keys for the two hash shapes used by garbling.
inline Label gate_key(const Label& a, const Label& b, std::uint64_t tweak) {
  Label k = gf_double(a) ^ gf_double(gf_double(b));
  k.lo ^= tweak;
  return k;
}
inline Label tag_key(const Label& a, std::uint64_t tweak) {
  Label k = gf_double(a);
  k.lo ^= tweak;
  k.hi ^= std::uint64_t{1} << 63;  // domain separation from gate keys
  return k;
}

}  // namespace privedge::gc
