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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privedge/inference.hpp"
#include "privedge/model.hpp"
#include "privedge/oracle.hpp"

namespace privedge::harness {

// Everything both parties hold for one prediction, dealt in-process.
struct Scenario {
  std::vector<model::Model> models;
  std::vector<std::optional<double>> user_tau;
  std::optional<double> global_tau;
  RingTensor image;
  std::string uploader;

  std::vector<std::pair<model::ModelShares, model::ModelShares>> shares;
  std::vector<std::pair<TripleStore, TripleStore>> triples;
  std::pair<ShareTensor, ShareTensor> image_shares;
  std::optional<std::pair<ShareTensor, ShareTensor>> tau_shares;

  inference::LoopbackInputs inputs(SessionId session = {1, 0});
  std::vector<oracle::OracleModel> oracle_models() const;
  Word global_tau_word() const;
};

// Shares weights, image and thresholds and deals exactly one prediction's
// worth of triples per model.
Scenario make_scenario(std::vector<model::Model> models, RingTensor image,
                       std::string uploader, std::optional<double> global_tau,
                       std::vector<std::optional<double>> user_tau, Rng& rng);

// Random image in [0, 1) at the spec's input shape.
RingTensor random_image(const model::ReconstructorSpec& spec, Rng& rng);

}  // namespace privedge::harness
