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

#include "privedge/sharing.hpp"

#include "privedge/audit.hpp"
#include "privedge/error.hpp"

namespace privedge::sharing {
namespace {

void check_same_layout(const ShareTensor& a, const ShareTensor& b) {
  require(a.params() == b.params(), ErrorKind::kParamsMismatch,
          "shares use different ring parameters");
  require(a.shape() == b.shape(), ErrorKind::kShapeMismatch,
          "shape " + shape_string(a.shape()) + " vs " +
              shape_string(b.shape()));
  require(a.session == b.session, ErrorKind::kSessionMismatch,
          "shares belong to different sessions");
}

void check_local_pair(const ShareTensor& a, const ShareTensor& b) {
  check_same_layout(a, b);
  require(a.owner == b.owner, ErrorKind::kSessionMismatch,
          "local operation mixes shares of different parties");
}

}  // namespace

std::pair<ShareTensor, ShareTensor> share(const RingTensor& secret, Rng& rng,
                                          SessionId session) {
  const auto& p = secret.params;
  require(shape_size(secret.shape) == secret.data.size(),
          ErrorKind::kShapeMismatch, "malformed secret tensor");
  ShareTensor s1{RingTensor{p, secret.shape, {}}, Party::kS1, session};
  ShareTensor s2{RingTensor{p, secret.shape, {}}, Party::kS2, session};
  s1.value.data.resize(secret.size());
  s2.value.data.resize(secret.size());
  for (std::size_t i = 0; i < secret.size(); ++i) {
    const Word r = rng.next_word(p);
    s1.value.data[i] = r;
    s2.value.data[i] = ring::sub(secret.data[i], r, p);
  }
  return {std::move(s1), std::move(s2)};
}

RingTensor reconstruct(const ShareTensor& a, const ShareTensor& b) {
  check_same_layout(a, b);
  require(a.owner != b.owner, ErrorKind::kSessionMismatch,
          "reconstruction needs one share from each party");
  Audit::instance().record_reconstruct();
  RingTensor out{a.params(), a.shape(), {}};
  out.data.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.data[i] = ring::add(a.value.data[i], b.value.data[i], a.params());
  }
  return out;
}

ShareTensor local_add(const ShareTensor& a, const ShareTensor& b) {
  check_local_pair(a, b);
  ShareTensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.value.data[i] = ring::add(a.value.data[i], b.value.data[i], a.params());
  }
  return out;
}

ShareTensor local_sub(const ShareTensor& a, const ShareTensor& b) {
  check_local_pair(a, b);
  ShareTensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.value.data[i] = ring::sub(a.value.data[i], b.value.data[i], a.params());
  }
  return out;
}

ShareTensor local_scale(const ShareTensor& a, Word scalar) {
  ShareTensor out = a;
  for (auto& w : out.value.data) w = ring::mul(w, scalar, a.params());
  return out;
}

ShareTensor add_public(const ShareTensor& a, const RingTensor& pub) {
  require(a.shape() == pub.shape, ErrorKind::kShapeMismatch,
          "public tensor shape " + shape_string(pub.shape));
  ShareTensor out = a;
  if (a.owner == Party::kS1) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out.value.data[i] = ring::add(a.value.data[i], pub.data[i], a.params());
    }
  }
  return out;
}

ShareTensor public_share(const RingTensor& pub, Party owner, SessionId session) {
  ShareTensor out{pub, owner, session};
  if (owner == Party::kS2) std::fill(out.value.data.begin(), out.value.data.end(), 0);
  return out;
}

ShareTensor truncate(const ShareTensor& a, int shift) {
  ShareTensor out = a;
  const int party = party_index(a.owner);
  for (auto& w : out.value.data) w = truncate_share(w, party, shift, a.params());
  return out;
}

}  // namespace privedge::sharing
