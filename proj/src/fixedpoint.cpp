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

#include "privedge/fixedpoint.hpp"

#include <cmath>
#include <sstream>

#include "privedge/error.hpp"

namespace privedge {

void RingParams::validate() const {
  const bool k_ok = k == 8 || k == 16 || k == 32 || k == 64;
  if (!k_ok || f < 2 || f >= k) {
    std::ostringstream os;
    os << "invalid ring parameters k=" << k << " f=" << f;
    fail(ErrorKind::kMalformedSpec, os.str());
  }
}

double max_encodable(const RingParams& p) {
  return std::ldexp(1.0, p.k - p.f - 1);
}

RingElement encode(double x, const RingParams& p) {
  if (!std::isfinite(x) || std::fabs(x) >= max_encodable(p)) {
    std::ostringstream os;
    os << "value " << x << " outside fixed-point range (k=" << p.k
       << ", f=" << p.f << ")";
    fail(ErrorKind::kOverflow, os.str());
  }
  const auto scaled = static_cast<std::int64_t>(std::llround(std::ldexp(x, p.f)));
  return {ring::from_signed(scaled, p)};
}

double decode(RingElement e, const RingParams& p) {
  return std::ldexp(static_cast<double>(ring::to_signed(e.value, p)), -p.f);
}

RingElement truncate(RingElement e, const RingParams& p) {
  return {ring::arith_shift(e.value, p.f, p)};
}

Word truncate_share(Word share, int party, int shift, const RingParams& p) {
  share &= p.mask();
  if (party == 0) return share >> shift;
  return ring::neg(ring::neg(share, p) >> shift, p);
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kOverflow: return "OverflowError";
    case ErrorKind::kRandomness: return "RandomnessError";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kSessionMismatch: return "SessionMismatch";
    case ErrorKind::kParamsMismatch: return "ParamsMismatch";
    case ErrorKind::kTripleExhausted: return "TripleExhausted";
    case ErrorKind::kChannel: return "ChannelError";
    case ErrorKind::kSequenceGap: return "SequenceGap";
    case ErrorKind::kDecode: return "DecodeError";
    case ErrorKind::kOtProtocol: return "OtProtocolError";
    case ErrorKind::kGarbledTable: return "GarbledTableError";
    case ErrorKind::kMalformedSpec: return "MalformedSpec";
    case ErrorKind::kVersionMismatch: return "VersionMismatch";
    case ErrorKind::kManifestMismatch: return "ManifestMismatch";
    case ErrorKind::kUsage: return "UsageError";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kAborted: return "Aborted";
  }
  return "UnknownError";
}

std::optional<ErrorKind> error_kind_from_name(std::string_view name) {
  for (int i = 0; i <= static_cast<int>(ErrorKind::kAborted); ++i) {
    const auto kind = static_cast<ErrorKind>(i);
    if (error_kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

}  // namespace privedge
