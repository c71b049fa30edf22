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

#include "privedge/model.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <json.hpp>
#include <limits>

#include "privedge/bytes.hpp"
#include "privedge/io.hpp"
#include "privedge/linear.hpp"
#include "privedge/net/messages.hpp"
#include "privedge/sharing.hpp"

namespace privedge::model {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr char kWeightMagic[] = "PVWT0001";
constexpr char kBundleMagic[] = "PVSB0001";

[[noreturn]] void malformed(const std::string& what) {
  fail(ErrorKind::kMalformedSpec, what);
}

std::uint32_t positive_u32(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() <= 0 ||
      j.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
    malformed(what + " must be a positive integer");
  }
  return j.get<std::uint32_t>();
}

Shape shape_field(const json& obj, const char* key, std::size_t rank,
                  const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].size() != rank) {
    malformed(where + ": '" + key + "' must be an array of " + std::to_string(rank));
  }
  Shape s;
  for (const auto& d : obj[key]) s.push_back(positive_u32(d, where + "." + key));
  return s;
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj[key].get<T>();
  } catch (const json::exception&) {
    malformed(where + ": field '" + key + "' has the wrong type");
  }
}

LayerSpec parse_layer(const json& j, std::size_t index, const RingParams& params) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (!j.is_object()) malformed(where + " must be an object");
  const auto kind = field_or<std::string>(j, "kind", "", where);
  LayerSpec l;
  if (kind == "conv") {
    l.kind = LayerKind::kConv;
    l.shape = shape_field(j, "shape", 4, where);
    l.stride = j.contains("stride") ? positive_u32(j["stride"], where + ".stride") : 1;
    if (field_or<std::string>(j, "padding", "same", where) != "same") {
      malformed(where + ": only 'same' padding is supported");
    }
    const auto act = field_or<std::string>(j, "activation", "none", where);
    if (act == "lrelu") {
      l.activation = Activation::kLrelu;
    } else if (act != "none") {
      malformed(where + ": unknown activation '" + act + "'");
    }
    l.alpha_shift = field_or<std::uint32_t>(j, "alpha_shift", 2, where);
    if (l.activation == Activation::kLrelu &&
        (l.alpha_shift == 0 || static_cast<int>(l.alpha_shift) >= params.k)) {
      malformed(where + ": alpha_shift out of range");
    }
    l.bias = field_or<bool>(j, "bias", false, where);
  } else if (kind == "upsample") {
    l.kind = LayerKind::kUpsample;
    l.factor = j.contains("factor") ? positive_u32(j["factor"], where + ".factor") : 2;
    if (field_or<std::string>(j, "activation", "none", where) != "none") {
      malformed(where + ": upsample layers carry no activation");
    }
  } else {
    malformed(where + ": kind must be 'conv' or 'upsample'");
  }
  return l;
}

RingTensor read_ring_tensor(ByteReader& r, const RingParams& p) {
  return net::read_tensor(r, p);
}

void write_header(ByteWriter& w, BundleKind kind, Party owner, const RingParams& p) {
  w.bytes({reinterpret_cast<const std::uint8_t*>(kBundleMagic), 8});
  w.u8(static_cast<std::uint8_t>(kind));
  w.u8(static_cast<std::uint8_t>(owner));
  w.u8(static_cast<std::uint8_t>(p.k));
  w.u8(static_cast<std::uint8_t>(p.f));
}

struct BundleHeader {
  Party owner;
  RingParams params;
};

BundleHeader read_header(ByteReader& r, BundleKind expected, const std::string& path) {
  const auto magic = r.bytes(8);
  if (std::memcmp(magic.data(), kBundleMagic, 8) != 0) {
    fail(ErrorKind::kDecode, path + ": not a share bundle");
  }
  const auto kind = r.u8();
  if (kind != static_cast<std::uint8_t>(expected)) {
    fail(ErrorKind::kDecode, path + ": share bundle holds kind " + std::to_string(kind) +
                                 ", expected " +
                                 std::to_string(static_cast<int>(expected)));
  }
  const auto owner = r.u8();
  if (owner > 1) fail(ErrorKind::kDecode, path + ": bad owner byte");
  RingParams p{r.u8(), r.u8()};
  try {
    p.validate();
  } catch (const Error&) {
    fail(ErrorKind::kDecode, path + ": bad ring parameters");
  }
  return {static_cast<Party>(owner), p};
}

}  // namespace

ReconstructorSpec ReconstructorSpec::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    malformed(std::string("model manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) malformed("model manifest must be a JSON object");
  ReconstructorSpec s;
  s.format_version = field_or<std::uint32_t>(j, "format_version", 0, "manifest");
  if (s.format_version != kFormatVersion) {
    malformed("unsupported format_version " + std::to_string(s.format_version));
  }
  s.user_id = field_or<std::string>(j, "user_id", "", "manifest");
  if (s.user_id.empty()) malformed("manifest: user_id is required");
  s.params.k = field_or<int>(j, "k", 0, "manifest");
  s.params.f = field_or<int>(j, "f", 0, "manifest");
  s.params.validate();
  s.normalization = field_or<std::string>(j, "normalization", "", "manifest");
  if (s.normalization != "div255") {
    malformed("manifest: normalization must be 'div255'");
  }
  s.input_shape = shape_field(j, "input_shape", 3, "manifest");
  if (!j.contains("layers") || !j["layers"].is_array() || j["layers"].empty()) {
    malformed("manifest: layers must be a non-empty array");
  }
  for (std::size_t i = 0; i < j["layers"].size(); ++i) {
    s.layers.push_back(parse_layer(j["layers"][i], i, s.params));
  }
  if (s.conv_count() == 0) malformed("manifest: at least one conv layer is required");
  s.feature_shapes();
  return s;
}

std::string ReconstructorSpec::to_json() const {
  ordered_json j;
  j["format_version"] = format_version;
  j["user_id"] = user_id;
  j["k"] = params.k;
  j["f"] = params.f;
  j["normalization"] = normalization;
  j["input_shape"] = input_shape;
  j["layers"] = ordered_json::array();
  for (const auto& l : layers) {
    ordered_json o;
    if (l.kind == LayerKind::kConv) {
      o["kind"] = "conv";
      o["shape"] = l.shape;
      o["stride"] = l.stride;
      o["padding"] = "same";
      o["activation"] = l.activation == Activation::kLrelu ? "lrelu" : "none";
      o["alpha_shift"] = l.alpha_shift;
      o["bias"] = l.bias;
    } else {
      o["kind"] = "upsample";
      o["factor"] = l.factor;
      o["activation"] = "none";
    }
    j["layers"].push_back(std::move(o));
  }
  return j.dump(2) + "\n";
}

std::vector<Shape> ReconstructorSpec::feature_shapes() const {
  if (input_shape.size() != 3 || shape_size(input_shape) == 0) {
    malformed("input_shape must be [h, w, c] with positive entries");
  }
  std::vector<Shape> out;
  Shape cur = input_shape;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.kind == LayerKind::kConv) {
      if (l.shape.size() != 4 || l.shape[2] != cur[2]) {
        malformed("layer " + std::to_string(i) + ": kernel " + shape_string(l.shape) +
                  " does not take " + std::to_string(cur[2]) + " input channels");
      }
      if (l.stride == 0) malformed("layer " + std::to_string(i) + ": zero stride");
      cur = {(cur[0] + l.stride - 1) / l.stride, (cur[1] + l.stride - 1) / l.stride,
             l.shape[3]};
    } else {
      if (l.factor == 0) malformed("layer " + std::to_string(i) + ": zero factor");
      cur = {cur[0] * l.factor, cur[1] * l.factor, cur[2]};
    }
    out.push_back(cur);
  }
  return out;
}

Shape ReconstructorSpec::output_shape() const { return feature_shapes().back(); }

std::size_t ReconstructorSpec::conv_count() const {
  return static_cast<std::size_t>(std::count_if(
      layers.begin(), layers.end(), [](const LayerSpec& l) { return l.kind == LayerKind::kConv; }));
}

std::vector<std::size_t> ReconstructorSpec::conv_layers() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind == LayerKind::kConv) idx.push_back(i);
  }
  return idx;
}

UndercompleteVerdict validate_undercomplete(const ReconstructorSpec& spec) {
  const auto shapes = spec.feature_shapes();
  UndercompleteVerdict v;
  v.input = shape_size(spec.input_shape);
  if (shapes.back() != spec.input_shape) {
    v.reason = "output shape " + shape_string(shapes.back()) + " differs from input shape " +
               shape_string(spec.input_shape);
    return v;
  }
  if (shapes.size() < 2) {
    v.reason = "no hidden layer";
    return v;
  }
  v.bottleneck = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i + 1 < shapes.size(); ++i) {
    v.bottleneck = std::min(v.bottleneck, shape_size(shapes[i]));
  }
  if (v.bottleneck >= v.input) {
    v.reason = "over-complete: smallest hidden layer has " + std::to_string(v.bottleneck) +
               " elements, input has " + std::to_string(v.input);
    return v;
  }
  v.accepted = true;
  return v;
}

Digest sha256(const std::string& bytes) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.size()) {
    fail(ErrorKind::kIo, "SHA-256 failed");
  }
  return d;
}

std::string digest_hex(const Digest& d) {
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (auto b : d) {
    s.push_back(hex[b >> 4]);
    s.push_back(hex[b & 15]);
  }
  return s;
}

WeightSet quantize_weights(const ReconstructorSpec& spec,
                           const std::vector<FloatLayer>& weights,
                           const Digest& manifest_hash) {
  const auto convs = spec.conv_layers();
  require(weights.size() == convs.size(), ErrorKind::kShapeMismatch,
          "expected weights for " + std::to_string(convs.size()) + " conv layers, got " +
              std::to_string(weights.size()));
  WeightSet ws{spec.user_id, spec.params, manifest_hash, {}};
  for (std::size_t t = 0; t < convs.size(); ++t) {
    const auto& l = spec.layers[convs[t]];
    const auto& fl = weights[t];
    require(fl.kernel.size() == shape_size(l.shape), ErrorKind::kShapeMismatch,
            "conv " + std::to_string(t) + ": kernel needs " +
                std::to_string(shape_size(l.shape)) + " values");
    require(fl.bias.size() == (l.bias ? l.shape[3] : 0u), ErrorKind::kShapeMismatch,
            "conv " + std::to_string(t) + ": bias size does not match the manifest");
    LayerWeights lw{RingTensor::zeros(spec.params, l.shape), std::nullopt};
    for (std::size_t i = 0; i < fl.kernel.size(); ++i) {
      try {
        lw.kernel.data[i] = encode(fl.kernel[i], spec.params).value;
      } catch (const Error&) {
        fail(ErrorKind::kOverflow, "conv " + std::to_string(t) + " kernel index " +
                                       std::to_string(i) + " is not representable");
      }
    }
    if (l.bias) {
      lw.bias = RingTensor::zeros(spec.params, {l.shape[3]});
      for (std::size_t i = 0; i < fl.bias.size(); ++i) {
        try {
          lw.bias->data[i] = encode(fl.bias[i], spec.params).value;
        } catch (const Error&) {
          fail(ErrorKind::kOverflow, "conv " + std::to_string(t) + " bias index " +
                                         std::to_string(i) + " is not representable");
        }
      }
    }
    ws.layers.push_back(std::move(lw));
  }
  return ws;
}

std::vector<FloatLayer> dequantize_weights(const WeightSet& ws) {
  std::vector<FloatLayer> out;
  for (const auto& l : ws.layers) {
    FloatLayer fl{l.kernel.decode(), {}};
    if (l.bias) fl.bias = l.bias->decode();
    out.push_back(std::move(fl));
  }
  return out;
}

void check_weights(const ReconstructorSpec& spec, const WeightSet& ws) {
  const auto convs = spec.conv_layers();
  require(ws.params == spec.params, ErrorKind::kParamsMismatch,
          "weight set ring parameters differ from the manifest");
  require(ws.layers.size() == convs.size(), ErrorKind::kShapeMismatch,
          "weight set layer count differs from the manifest");
  for (std::size_t t = 0; t < convs.size(); ++t) {
    const auto& l = spec.layers[convs[t]];
    require(ws.layers[t].kernel.shape == l.shape, ErrorKind::kShapeMismatch,
            "conv " + std::to_string(t) + ": kernel shape differs from the manifest");
    require(ws.layers[t].bias.has_value() == l.bias, ErrorKind::kShapeMismatch,
            "conv " + std::to_string(t) + ": bias presence differs from the manifest");
    if (l.bias) {
      require(ws.layers[t].bias->shape == Shape{l.shape[3]}, ErrorKind::kShapeMismatch,
              "conv " + std::to_string(t) + ": bias shape differs from the manifest");
    }
  }
}

std::vector<std::uint8_t> encode_weights(const ReconstructorSpec& spec, const WeightSet& ws) {
  check_weights(spec, ws);
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kWeightMagic), 8});
  w.bytes(ws.manifest_hash);
  // Words are stored sign-extended to 64 bits.
  for (const auto& l : ws.layers) {
    for (Word x : l.kernel.data) w.u64(static_cast<Word>(ring::to_signed(x, ws.params)));
    if (l.bias) {
      for (Word x : l.bias->data) w.u64(static_cast<Word>(ring::to_signed(x, ws.params)));
    }
  }
  return w.take();
}

WeightSet decode_weights(const ReconstructorSpec& spec, const Digest& manifest_hash,
                         const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  const auto magic = r.bytes(8);
  if (std::memcmp(magic.data(), kWeightMagic, 8) != 0) {
    fail(ErrorKind::kDecode, "weights.bin: bad magic");
  }
  Digest stored{};
  const auto h = r.bytes(32);
  std::copy(h.begin(), h.end(), stored.begin());
  if (stored != manifest_hash) {
    fail(ErrorKind::kManifestMismatch, "weights.bin is bound to a different manifest");
  }
  const RingParams& p = spec.params;
  const std::int64_t lo = p.k == 64 ? std::numeric_limits<std::int64_t>::min()
                                    : -(std::int64_t{1} << (p.k - 1));
  const std::int64_t hi = p.k == 64 ? std::numeric_limits<std::int64_t>::max()
                                    : (std::int64_t{1} << (p.k - 1)) - 1;
  auto read_word = [&](std::size_t t, std::size_t i) {
    const auto v = static_cast<std::int64_t>(r.u64());
    if (v < lo || v > hi) {
      fail(ErrorKind::kOverflow, "weights.bin: conv " + std::to_string(t) + " word " +
                                     std::to_string(i) + " does not fit the ring");
    }
    return ring::from_signed(v, p);
  };
  WeightSet ws{spec.user_id, p, manifest_hash, {}};
  const auto convs = spec.conv_layers();
  for (std::size_t t = 0; t < convs.size(); ++t) {
    const auto& l = spec.layers[convs[t]];
    LayerWeights lw{RingTensor::zeros(p, l.shape), std::nullopt};
    for (std::size_t i = 0; i < lw.kernel.size(); ++i) lw.kernel.data[i] = read_word(t, i);
    if (l.bias) {
      lw.bias = RingTensor::zeros(p, {l.shape[3]});
      for (std::size_t i = 0; i < lw.bias->size(); ++i) lw.bias->data[i] = read_word(t, i);
    }
    ws.layers.push_back(std::move(lw));
  }
  if (!r.done()) fail(ErrorKind::kDecode, "weights.bin: trailing bytes");
  return ws;
}

Model make_model(const ReconstructorSpec& spec, const std::vector<FloatLayer>& weights) {
  Model m{spec, spec.to_json(), {}};
  m.weights = quantize_weights(spec, weights, sha256(m.manifest));
  return m;
}

void save_model(const std::filesystem::path& dir, const ReconstructorSpec& spec,
                const std::vector<FloatLayer>& weights) {
  const Model m = make_model(spec, weights);
  std::filesystem::create_directories(dir);
  io::write_text(dir / "model.json", m.manifest);
  io::write_bytes(dir / "weights.bin", encode_weights(spec, m.weights));
}

Model load_model(const std::filesystem::path& dir) {
  Model m;
  m.manifest = io::read_text(dir / "model.json");
  m.spec = ReconstructorSpec::parse(m.manifest);
  m.weights = decode_weights(m.spec, sha256(m.manifest), io::read_bytes(dir / "weights.bin"));
  return m;
}

std::pair<ModelShares, ModelShares> share_weights(const Model& model, Rng& rng,
                                                  std::optional<double> tau) {
  check_weights(model.spec, model.weights);
  ModelShares a{model.spec.user_id, Party::kS1, model.manifest, model.spec, {}, {}, {}};
  ModelShares b{model.spec.user_id, Party::kS2, model.manifest, model.spec, {}, {}, {}};
  for (const auto& l : model.weights.layers) {
    auto [k1, k2] = sharing::share(l.kernel, rng);
    a.kernels.push_back(std::move(k1));
    b.kernels.push_back(std::move(k2));
    if (l.bias) {
      auto [b1, b2] = sharing::share(*l.bias, rng);
      a.biases.emplace_back(std::move(b1));
      b.biases.emplace_back(std::move(b2));
    } else {
      a.biases.emplace_back();
      b.biases.emplace_back();
    }
  }
  if (tau) {
    auto [t1, t2] = sharing::share(RingTensor::encode(model.spec.params, {1}, {*tau}), rng);
    a.tau = std::move(t1);
    b.tau = std::move(t2);
  }
  return {std::move(a), std::move(b)};
}

WeightSet reconstruct_weights(const ModelShares& a, const ModelShares& b) {
  require(a.manifest == b.manifest, ErrorKind::kManifestMismatch,
          "weight shares belong to different manifests");
  WeightSet ws{a.user_id, a.spec.params, a.manifest_hash(), {}};
  for (std::size_t t = 0; t < a.kernels.size(); ++t) {
    LayerWeights lw{sharing::reconstruct(a.kernels[t], b.kernels[t]), std::nullopt};
    if (a.biases[t]) lw.bias = sharing::reconstruct(*a.biases[t], *b.biases[t]);
    ws.layers.push_back(std::move(lw));
  }
  return ws;
}

void save_model_shares(const std::filesystem::path& path, const ModelShares& s) {
  ByteWriter w;
  write_header(w, BundleKind::kWeights, s.owner, s.spec.params);
  w.str(s.manifest);
  w.u32(static_cast<std::uint32_t>(s.kernels.size()));
  for (std::size_t t = 0; t < s.kernels.size(); ++t) {
    net::write_tensor(w, s.kernels[t].value);
    w.u8(s.biases[t] ? 1 : 0);
    if (s.biases[t]) net::write_tensor(w, s.biases[t]->value);
  }
  w.u8(s.tau ? 1 : 0);
  if (s.tau) net::write_tensor(w, s.tau->value);
  io::write_bytes(path, w.buffer());
}

ModelShares load_model_shares(const std::filesystem::path& path) {
  const auto bytes = io::read_bytes(path);
  ByteReader r(bytes);
  const auto hdr = read_header(r, BundleKind::kWeights, path.string());
  ModelShares s;
  s.owner = hdr.owner;
  s.manifest = r.str();
  s.spec = ReconstructorSpec::parse(s.manifest);
  s.user_id = s.spec.user_id;
  if (s.spec.params != hdr.params) {
    fail(ErrorKind::kParamsMismatch, path.string() + ": ring parameters differ from manifest");
  }
  const auto n = r.u32();
  const auto convs = s.spec.conv_layers();
  if (n != convs.size()) fail(ErrorKind::kDecode, path.string() + ": wrong layer count");
  for (std::size_t t = 0; t < n; ++t) {
    const auto& l = s.spec.layers[convs[t]];
    s.kernels.push_back({read_ring_tensor(r, hdr.params), hdr.owner, {}});
    if (s.kernels.back().shape() != l.shape) {
      fail(ErrorKind::kShapeMismatch, path.string() + ": kernel shape differs from manifest");
    }
    if (r.u8()) {
      s.biases.emplace_back(ShareTensor{read_ring_tensor(r, hdr.params), hdr.owner, {}});
      if (!l.bias || s.biases.back()->shape() != Shape{l.shape[3]}) {
        fail(ErrorKind::kShapeMismatch, path.string() + ": bias differs from manifest");
      }
    } else {
      if (l.bias) fail(ErrorKind::kShapeMismatch, path.string() + ": bias missing");
      s.biases.emplace_back();
    }
  }
  if (r.u8()) {
    s.tau = ShareTensor{read_ring_tensor(r, hdr.params), hdr.owner, {}};
    if (s.tau->shape() != Shape{1}) fail(ErrorKind::kDecode, path.string() + ": bad tau");
  }
  r.expect_done();
  return s;
}

void save_tensor_share(const std::filesystem::path& path, BundleKind kind,
                       const ShareTensor& s) {
  ByteWriter w;
  write_header(w, kind, s.owner, s.params());
  net::write_tensor(w, s.value);
  io::write_bytes(path, w.buffer());
}

ShareTensor load_tensor_share(const std::filesystem::path& path, BundleKind kind) {
  const auto bytes = io::read_bytes(path);
  ByteReader r(bytes);
  const auto hdr = read_header(r, kind, path.string());
  ShareTensor s{read_ring_tensor(r, hdr.params), hdr.owner, {}};
  r.expect_done();
  return s;
}

std::vector<TripleShape> triple_plan(const ReconstructorSpec& spec) {
  std::vector<TripleShape> plan;
  Shape cur = spec.input_shape;
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::kConv) {
      const auto g = linear::ConvGeometry::make(cur, l.shape, l.stride);
      plan.push_back(g.triple_shape());
      cur = g.output_shape();
    } else {
      cur = {cur[0] * l.factor, cur[1] * l.factor, cur[2]};
    }
  }
  plan.push_back(TripleShape::elementwise(static_cast<std::uint32_t>(shape_size(cur))));
  return plan;
}

ReconstructorSpec desk_spec(const std::string& user_id, RingParams params, bool bias) {
  ReconstructorSpec s;
  s.user_id = user_id;
  s.params = params;
  s.input_shape = {16, 16, 1};
  auto conv = [&](std::uint32_t k, std::uint32_t cin, std::uint32_t cout,
                  std::uint32_t stride, Activation act) {
    LayerSpec l;
    l.kind = LayerKind::kConv;
    l.shape = {k, k, cin, cout};
    l.stride = stride;
    l.activation = act;
    l.bias = bias;
    s.layers.push_back(l);
  };
  auto up = [&] {
    LayerSpec l;
    l.kind = LayerKind::kUpsample;
    s.layers.push_back(l);
  };
  conv(4, 1, 4, 2, Activation::kLrelu);
  conv(4, 4, 8, 2, Activation::kLrelu);
  conv(4, 8, 8, 2, Activation::kLrelu);
  up();
  conv(3, 8, 8, 1, Activation::kLrelu);
  up();
  conv(3, 8, 4, 1, Activation::kLrelu);
  up();
  conv(3, 4, 1, 1, Activation::kNone);
  return s;
}

std::vector<FloatLayer> random_weights(const ReconstructorSpec& spec, Rng& rng) {
  std::vector<FloatLayer> out;
  for (auto i : spec.conv_layers()) {
    const auto& l = spec.layers[i];
    const double a = 1.0 / std::sqrt(static_cast<double>(l.shape[0] * l.shape[1] * l.shape[2]));
    FloatLayer fl;
    fl.kernel.resize(shape_size(l.shape));
    for (auto& w : fl.kernel) w = (2.0 * rng.next_unit() - 1.0) * a;
    if (l.bias) {
      fl.bias.resize(l.shape[3]);
      for (auto& b : fl.bias) b = (2.0 * rng.next_unit() - 1.0) * 0.1;
    }
    out.push_back(std::move(fl));
  }
  return out;
}

std::vector<FloatLayer> constant_weights(const ReconstructorSpec& spec, Rng& rng,
                                         double level) {
  const auto convs = spec.conv_layers();
  if (!spec.layers[convs.back()].bias) {
    malformed("constant model needs a bias on the final conv layer");
  }
  auto w = random_weights(spec, rng);
  std::fill(w.back().kernel.begin(), w.back().kernel.end(), 0.0);
  std::fill(w.back().bias.begin(), w.back().bias.end(), level);
  return w;
}

namespace {

// Next whitespace-separated header token of a netpbm file, skipping comments.
std::string pnm_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(static_cast<char>(b[pos++]));
  return tok;
}

}  // namespace

RingTensor load_image(const std::filesystem::path& path, const RingParams& params) {
  const auto b = io::read_bytes(path);
  std::size_t pos = 0;
  const auto magic = pnm_token(b, pos);
  std::uint32_t channels = 0;
  if (magic == "P5") channels = 1;
  if (magic == "P6") channels = 3;
  if (channels == 0) fail(ErrorKind::kDecode, path.string() + ": expected binary PGM or PPM");
  std::uint32_t w = 0, h = 0, maxval = 0;
  try {
    w = static_cast<std::uint32_t>(std::stoul(pnm_token(b, pos)));
    h = static_cast<std::uint32_t>(std::stoul(pnm_token(b, pos)));
    maxval = static_cast<std::uint32_t>(std::stoul(pnm_token(b, pos)));
  } catch (const std::exception&) {
    fail(ErrorKind::kDecode, path.string() + ": bad image header");
  }
  if (maxval != 255 || w == 0 || h == 0) {
    fail(ErrorKind::kDecode, path.string() + ": only 8-bit images with maxval 255");
  }
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = std::size_t{w} * h * channels;
  if (b.size() < pos + n) fail(ErrorKind::kDecode, path.string() + ": truncated raster");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = b[pos + i] / 255.0;
  return RingTensor::encode(params, {h, w, channels}, v);
}

void save_pgm(const std::filesystem::path& path, std::uint32_t h, std::uint32_t w,
              const std::vector<std::uint8_t>& pixels) {
  require(pixels.size() == std::size_t{h} * w, ErrorKind::kShapeMismatch,
          "pixel count does not match the image size");
  std::string head = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  io::write_bytes(path, out);
}

}  // namespace privedge::model
