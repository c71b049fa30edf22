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
#include <optional>
#include <string>
#include <vector>

namespace privedge {

enum class Decision : std::uint8_t { kAllow, kBlock };

const char* decision_name(Decision d);

struct PredictionResult {
  std::optional<std::uint32_t> outcome;  // index into the registered model list
  std::string outcome_user;              // empty when outcome is none
  Decision decision = Decision::kAllow;

  friend bool operator==(const PredictionResult&, const PredictionResult&) = default;
};

// outcome = index when the threshold flag is set, none otherwise; block iff
// the outcome names a user other than the uploader. Throws kDecode for an
// index outside the model list.
PredictionResult blocking_rule(std::uint32_t index, bool flag,
                               const std::vector<std::string>& users,
                               const std::string& uploader);

}  // namespace privedge
