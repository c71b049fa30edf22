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

#include "privedge/garbled/circuit.hpp"
#include "privedge/model.hpp"
#include "privedge/result.hpp"
#include "privedge/tape.hpp"

namespace privedge::oracle {

// Cleartext fixed-point reference of the whole pipeline. Convolutions are
// direct loops; nothing here shares code with the im2col lowering.

enum class TruncMode : std::uint8_t {
  kCanonical,  // exact arithmetic shift
  kLockstep,   // replays s1's recorded shares through share-wise truncation
};

struct OracleOptions {
  TruncMode mode = TruncMode::kCanonical;
  TruncationTape* tape = nullptr;  // required in lockstep mode
  gc::LreluMode lrelu = gc::LreluMode::kInCircuitShift;
};

struct OracleTrace {
  std::vector<RingTensor> layers;  // output of every layer, activation applied
  Word dissimilarity = 0;          // scale 2^f
};

// [h, w, c] * [kh, kw, cin, cout], SAME padding, untruncated (scale 2^{2f}).
RingTensor conv_direct(const RingTensor& x, const RingTensor& kernel, std::uint32_t stride);

RingTensor upsample(const RingTensor& x, std::uint32_t factor);

// Truncates a product carrying scale 2^{2f} by `shift`; lockstep mode pulls
// one tape entry.
RingTensor truncate(const RingTensor& v, int shift, const OracleOptions& opt);

RingTensor lrelu(const RingTensor& z, std::uint32_t alpha_shift, const OracleOptions& opt);

// Sum of squared differences, one truncation.
Word dissimilarity(const RingTensor& x, const RingTensor& xbar, const OracleOptions& opt);

OracleTrace oracle_forward(const model::ReconstructorSpec& spec, const model::WeightSet& ws,
                           const RingTensor& image, const OracleOptions& opt = {});

// Double-precision forward pass, for accuracy bounds.
std::vector<double> float_forward(const model::ReconstructorSpec& spec,
                                  const std::vector<model::FloatLayer>& weights,
                                  const std::vector<double>& image);

struct OracleModel {
  model::ReconstructorSpec spec;
  model::WeightSet weights;
  std::optional<Word> tau;  // per-user threshold, falls back to the global one
};

struct OraclePrediction {
  PredictionResult result;
  std::uint32_t argmin = 0;
  bool flag = false;
  std::vector<Word> dissimilarities;
};

// Brute-force argmin (lowest index on ties, signed comparison) with flag
// d <= tau. `tapes` holds one tape per model in lockstep mode.
OraclePrediction oracle_predict(const std::vector<OracleModel>& models,
                                const RingTensor& image, Word global_tau,
                                const std::string& uploader,
                                TruncMode mode = TruncMode::kCanonical,
                                std::vector<TruncationTape>* tapes = nullptr,
                                gc::LreluMode lrelu = gc::LreluMode::kInCircuitShift);

}  // namespace privedge::oracle
