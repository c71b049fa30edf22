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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "privedge/beaver.hpp"
#include "privedge/rng.hpp"
#include "privedge/tensor.hpp"

namespace privedge::model {

inline constexpr std::uint32_t kFormatVersion = 1;

enum class LayerKind : std::uint8_t { kConv, kUpsample };
enum class Activation : std::uint8_t { kNone, kLrelu };

// Spatial axes are [rows, cols]: the input is [h, w, c] and a conv kernel is
// [kh, kw, c_in, c_out], both row-major. Square shapes read the same either
// way round.
struct LayerSpec {
  LayerKind kind = LayerKind::kConv;
  Shape shape;              // conv kernel; empty for upsample
  std::uint32_t stride = 1;  // conv
  std::uint32_t factor = 2;  // upsample
  Activation activation = Activation::kNone;
  std::uint32_t alpha_shift = 2;  // alpha = 2^-alpha_shift
  bool bias = false;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ReconstructorSpec {
  std::uint32_t format_version = kFormatVersion;
  std::string user_id;
  RingParams params;
  std::string normalization = "div255";
  Shape input_shape;
  std::vector<LayerSpec> layers;

  // Throws kMalformedSpec on missing or ill-typed fields and on geometry that
  // does not chain (channel counts, zero sizes, bad strides).
  static ReconstructorSpec parse(const std::string& json_text);
  std::string to_json() const;  // canonical, 2-space indented

  // Feature-map shape after each layer; validates the chain.
  std::vector<Shape> feature_shapes() const;
  Shape output_shape() const;
  std::size_t conv_count() const;
  // Indices into `layers` of the conv layers, in order.
  std::vector<std::size_t> conv_layers() const;

  friend bool operator==(const ReconstructorSpec&, const ReconstructorSpec&) = default;
};

struct UndercompleteVerdict {
  bool accepted = false;
  std::string reason;
  std::size_t bottleneck = 0;  // smallest hidden feature map, in elements
  std::size_t input = 0;
};

// Accepts iff some hidden feature map is strictly smaller than the input and
// the output shape equals the input shape.
UndercompleteVerdict validate_undercomplete(const ReconstructorSpec& spec);

using Digest = std::array<std::uint8_t, 32>;
Digest sha256(const std::string& bytes);
std::string digest_hex(const Digest& d);

// Float weights of one conv layer, same layouts as the ring tensors.
struct FloatLayer {
  std::vector<double> kernel;
  std::vector<double> bias;  // empty when the layer has none
};

struct LayerWeights {
  RingTensor kernel;
  std::optional<RingTensor> bias;  // [c_out]
};

// Quantized weights of one reconstructor, bound to its manifest by hash.
struct WeightSet {
  std::string user_id;
  RingParams params;
  Digest manifest_hash{};
  std::vector<LayerWeights> layers;  // conv layers only
};

// Throws kOverflow naming the first unrepresentable layer/index, and
// kShapeMismatch when sizes disagree with the spec.
WeightSet quantize_weights(const ReconstructorSpec& spec,
                           const std::vector<FloatLayer>& weights,
                           const Digest& manifest_hash);
std::vector<FloatLayer> dequantize_weights(const WeightSet& ws);

// Checks every tensor shape against the spec.
void check_weights(const ReconstructorSpec& spec, const WeightSet& ws);

// weights.bin: "PVWT0001", SHA-256 of the model.json bytes, then per conv
// layer the kernel and (if present) bias as 64-bit little-endian words.
std::vector<std::uint8_t> encode_weights(const ReconstructorSpec& spec,
                                         const WeightSet& ws);
WeightSet decode_weights(const ReconstructorSpec& spec, const Digest& manifest_hash,
                         const std::vector<std::uint8_t>& bytes);

struct Model {
  ReconstructorSpec spec;
  std::string manifest;  // model.json bytes as stored
  WeightSet weights;
};

// model_dir/{model.json, weights.bin}.
void save_model(const std::filesystem::path& dir, const ReconstructorSpec& spec,
                const std::vector<FloatLayer>& weights);
Model load_model(const std::filesystem::path& dir);
Model make_model(const ReconstructorSpec& spec, const std::vector<FloatLayer>& weights);

// One party's shares of a reconstructor plus its optional per-user threshold.
struct ModelShares {
  std::string user_id;
  Party owner = Party::kS1;
  std::string manifest;
  ReconstructorSpec spec;
  std::vector<ShareTensor> kernels;
  std::vector<std::optional<ShareTensor>> biases;
  std::optional<ShareTensor> tau;  // [1]

  Digest manifest_hash() const { return sha256(manifest); }
};

std::pair<ModelShares, ModelShares> share_weights(const Model& model, Rng& rng,
                                                  std::optional<double> tau = {});
// Reconstructs the ring weights (test and tooling use only).
WeightSet reconstruct_weights(const ModelShares& a, const ModelShares& b);

// Share bundle files. Every file is "PVSB0001", u8 kind, u8 owner, u8 k,
// u8 f, then a kind-specific body; tensors use the k/8-byte word layout.
enum class BundleKind : std::uint8_t { kWeights = 1, kImage = 2, kThreshold = 3 };

void save_model_shares(const std::filesystem::path& path, const ModelShares& s);
ModelShares load_model_shares(const std::filesystem::path& path);
void save_tensor_share(const std::filesystem::path& path, BundleKind kind,
                       const ShareTensor& s);
ShareTensor load_tensor_share(const std::filesystem::path& path, BundleKind kind);

// Triple shapes one prediction consumes for this model, in protocol order:
// one matmul per conv layer, then one elementwise triple for the
// dissimilarity.
std::vector<TripleShape> triple_plan(const ReconstructorSpec& spec);

// Desk architecture: 16x16x1 input, three 4x4 stride-2 convs with 4/8/8
// channels, then three (upsample x2, 3x3 conv) with 8/4/1 channels. L-ReLU
// everywhere except the final linear layer.
ReconstructorSpec desk_spec(const std::string& user_id, RingParams params = {},
                            bool bias = false);

// Uniform weights in +-1/sqrt(fan_in) (and +-0.1 biases).
std::vector<FloatLayer> random_weights(const ReconstructorSpec& spec, Rng& rng);
// Random hidden layers and a zero final kernel with bias `level`: the model
// reconstructs every input as the constant image `level`. Needs spec bias.
std::vector<FloatLayer> constant_weights(const ReconstructorSpec& spec, Rng& rng,
                                         double level);

// Image file to ring tensor [h, w, c] normalized by 1/255. Reads binary PGM
// (P5) and PPM (P6).
RingTensor load_image(const std::filesystem::path& path, const RingParams& params);
void save_pgm(const std::filesystem::path& path, std::uint32_t h, std::uint32_t w,
              const std::vector<std::uint8_t>& pixels);

}  // namespace privedge::model
