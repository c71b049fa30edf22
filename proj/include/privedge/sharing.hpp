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

#include <utility>

#include "privedge/rng.hpp"
#include "privedge/tensor.hpp"

namespace privedge::sharing {

// S1 = R uniform, S2 = secret - R.
std::pair<ShareTensor, ShareTensor> share(const RingTensor& secret, Rng& rng,
                                          SessionId session = {});

// Elementwise a + b. Throws kShapeMismatch / kSessionMismatch /
// kParamsMismatch when the shares are not two halves of one sharing.
RingTensor reconstruct(const ShareTensor& a, const ShareTensor& b);

ShareTensor local_add(const ShareTensor& a, const ShareTensor& b);
ShareTensor local_sub(const ShareTensor& a, const ShareTensor& b);
ShareTensor local_scale(const ShareTensor& a, Word scalar);

// Adds a public tensor to the secret: only s1 adds, s2 keeps its share.
ShareTensor add_public(const ShareTensor& a, const RingTensor& pub);

// Share of a public tensor: s1 holds the value, s2 holds zeros.
ShareTensor public_share(const RingTensor& pub, Party owner, SessionId session);

// Share-wise truncation by `shift` bits (see truncate_share).
ShareTensor truncate(const ShareTensor& a, int shift);

}  // namespace privedge::sharing
