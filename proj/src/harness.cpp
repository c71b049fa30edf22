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

#include "privedge/harness.hpp"

#include "privedge/sharing.hpp"

namespace privedge::harness {

Scenario make_scenario(std::vector<model::Model> models, RingTensor image,
                       std::string uploader, std::optional<double> global_tau,
                       std::vector<std::optional<double>> user_tau, Rng& rng) {
  require(!models.empty(), ErrorKind::kUsage, "scenario without models");
  if (user_tau.empty()) user_tau.resize(models.size());
  require(user_tau.size() == models.size(), ErrorKind::kUsage, "one tau slot per model");
  Scenario s;
  s.models = std::move(models);
  s.user_tau = std::move(user_tau);
  s.global_tau = global_tau;
  s.image = std::move(image);
  s.uploader = std::move(uploader);
  const RingParams& p = s.image.params;
  for (std::size_t i = 0; i < s.models.size(); ++i) {
    s.shares.push_back(model::share_weights(s.models[i], rng, s.user_tau[i]));
    s.triples.push_back(deal_triples(model::triple_plan(s.models[i].spec), 1, p, rng));
  }
  s.image_shares = sharing::share(s.image, rng);
  if (global_tau) s.tau_shares = sharing::share(RingTensor::encode(p, {1}, {*global_tau}), rng);
  return s;
}

inference::LoopbackInputs Scenario::inputs(SessionId session) {
  inference::LoopbackInputs in;
  in.session = session;
  in.uploader = uploader;
  in.image = image_shares;
  in.tau = tau_shares;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    in.models.emplace_back(&shares[i].first, &shares[i].second);
    in.triples.emplace_back(&triples[i].first, &triples[i].second);
  }
  return in;
}

std::vector<oracle::OracleModel> Scenario::oracle_models() const {
  std::vector<oracle::OracleModel> out;
  for (std::size_t i = 0; i < models.size(); ++i) {
    oracle::OracleModel m{models[i].spec, models[i].weights, std::nullopt};
    if (user_tau[i]) m.tau = encode(*user_tau[i], models[i].spec.params).value;
    out.push_back(std::move(m));
  }
  return out;
}

Word Scenario::global_tau_word() const {
  return global_tau ? encode(*global_tau, image.params).value : 0;
}

RingTensor random_image(const model::ReconstructorSpec& spec, Rng& rng) {
  std::vector<double> v(shape_size(spec.input_shape));
  for (auto& x : v) x = static_cast<double>(rng.uniform(256)) / 255.0;
  return RingTensor::encode(spec.params, spec.input_shape, v);
}

}  // namespace privedge::harness
