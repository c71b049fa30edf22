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

#include <cstddef>
#include <vector>

#include "privedge/fixedpoint.hpp"

namespace privedge {

// Test hook: s1's pre-truncation shares, one entry per share-wise truncation
// in protocol order. The lockstep oracle replays them to reproduce the secure
// path's rounding bit for bit.
struct TruncationTape {
  std::vector<std::vector<Word>> entries;
  std::size_t cursor = 0;

  void record(std::vector<Word> s1_share) { entries.push_back(std::move(s1_share)); }
  const std::vector<Word>& next();
  bool exhausted() const { return cursor == entries.size(); }
};

}  // namespace privedge
