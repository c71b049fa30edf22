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

#include "privedge/result.hpp"

#include "privedge/error.hpp"

namespace privedge {

const char* decision_name(Decision d) { return d == Decision::kBlock ? "block" : "allow"; }

PredictionResult blocking_rule(std::uint32_t index, bool flag,
                               const std::vector<std::string>& users,
                               const std::string& uploader) {
  require(index < users.size(), ErrorKind::kDecode,
          "decoded class index " + std::to_string(index) + " is out of range");
  PredictionResult r;
  if (!flag) return r;
  r.outcome = index;
  r.outcome_user = users[index];
  r.decision = users[index] == uploader ? Decision::kAllow : Decision::kBlock;
  return r;
}

}  // namespace privedge
