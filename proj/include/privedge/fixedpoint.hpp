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

namespace privedge {

using Word = std::uint64_t;

// Ring Z_{2^k} with a two's-complement fixed-point encoding scaled by 2^f.
struct RingParams {
  int k = 64;
  int f = 16;

  // Throws kMalformedSpec unless k in {8,16,32,64} and 2 <= f < k.
  void validate() const;

  Word mask() const { return k == 64 ? ~Word{0} : ((Word{1} << k) - 1); }
  Word sign_bit() const { return Word{1} << (k - 1); }
  int word_bytes() const { return k / 8; }

  friend bool operator==(const RingParams&, const RingParams&) = default;
};

struct RingElement {
  Word value = 0;
  friend bool operator==(const RingElement&, const RingElement&) = default;
};

namespace ring {

inline Word reduce(Word v, const RingParams& p) { return v & p.mask(); }
inline Word add(Word a, Word b, const RingParams& p) { return (a + b) & p.mask(); }
inline Word sub(Word a, Word b, const RingParams& p) { return (a - b) & p.mask(); }
inline Word mul(Word a, Word b, const RingParams& p) { return (a * b) & p.mask(); }
inline Word neg(Word a, const RingParams& p) { return (Word{0} - a) & p.mask(); }

inline bool is_negative(Word v, const RingParams& p) {
  return (v & p.sign_bit()) != 0;
}

// Sign-extends a k-bit value to 64 bits.
inline std::int64_t to_signed(Word v, const RingParams& p) {
  v &= p.mask();
  if (p.k < 64 && is_negative(v, p)) v |= ~p.mask();
  return static_cast<std::int64_t>(v);
}

inline Word from_signed(std::int64_t v, const RingParams& p) {
  return static_cast<Word>(v) & p.mask();
}

// Arithmetic right shift within the k-bit ring.
inline Word arith_shift(Word v, int shift, const RingParams& p) {
  return from_signed(to_signed(v, p) >> shift, p);
}

}  // namespace ring

// Largest magnitude (exclusive) encodable without overflow: 2^{k-f-1}.
double max_encodable(const RingParams& p);

// round(x * 2^f) mod 2^k; throws kOverflow when |x| >= 2^{k-f-1}.
RingElement encode(double x, const RingParams& p);

double decode(RingElement e, const RingParams& p);

// Exact arithmetic shift by f of a product carrying scale 2^{2f}.
RingElement truncate(RingElement e, const RingParams& p);

// Share-wise truncation of one additive share. Party 0 shifts its share
// logically, party 1 negates, shifts, and negates back; the reconstructed
// result is within one unit of truncate(v) except with probability about
// |v| * 2^{1-k} over the sharing randomness.
Word truncate_share(Word share, int party, int shift, const RingParams& p);

}  // namespace privedge
