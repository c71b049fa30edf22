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

#include "privedge/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "privedge/error.hpp"

namespace privedge::oracle {

namespace {

struct Same {
  std::uint32_t out = 0;
  std::uint32_t pad = 0;
};

Same same_padding(std::uint32_t in, std::uint32_t k, std::uint32_t s) {
  const std::uint32_t out = (in + s - 1) / s;
  const std::int64_t total =
      std::max<std::int64_t>(0, std::int64_t{out - 1} * s + k - std::int64_t{in});
  return {out, static_cast<std::uint32_t>(total / 2)};
}

Word lockstep_share_trunc(Word v, Word s1, int shift, const RingParams& p) {
  const Word s2 = ring::sub(v, s1, p);
  return ring::add(truncate_share(s1, 0, shift, p), truncate_share(s2, 1, shift, p), p);
}

}  // namespace

RingTensor conv_direct(const RingTensor& x, const RingTensor& kernel, std::uint32_t stride) {
  require(x.shape.size() == 3 && kernel.shape.size() == 4 && kernel.shape[2] == x.shape[2],
          ErrorKind::kShapeMismatch,
          "conv of " + shape_string(x.shape) + " by " + shape_string(kernel.shape));
  require(stride >= 1, ErrorKind::kMalformedSpec, "zero stride");
  const RingParams& p = x.params;
  const std::uint32_t H = x.shape[0], W = x.shape[1], C = x.shape[2];
  const std::uint32_t KH = kernel.shape[0], KW = kernel.shape[1], CO = kernel.shape[3];
  const Same sy = same_padding(H, KH, stride), sx = same_padding(W, KW, stride);
  RingTensor out = RingTensor::zeros(p, {sy.out, sx.out, CO});
  for (std::uint32_t oy = 0; oy < sy.out; ++oy) {
    for (std::uint32_t ox = 0; ox < sx.out; ++ox) {
      for (std::uint32_t co = 0; co < CO; ++co) {
        Word acc = 0;
        for (std::uint32_t ky = 0; ky < KH; ++ky) {
          const std::int64_t iy = std::int64_t{oy} * stride + ky - sy.pad;
          if (iy < 0 || iy >= H) continue;
          for (std::uint32_t kx = 0; kx < KW; ++kx) {
            const std::int64_t ix = std::int64_t{ox} * stride + kx - sx.pad;
            if (ix < 0 || ix >= W) continue;
            for (std::uint32_t ci = 0; ci < C; ++ci) {
              acc += x.data[(iy * W + ix) * C + ci] *
                     kernel.data[((std::size_t{ky} * KW + kx) * C + ci) * CO + co];
            }
          }
        }
        out.data[(std::size_t{oy} * sx.out + ox) * CO + co] = acc & p.mask();
      }
    }
  }
  return out;
}

RingTensor upsample(const RingTensor& x, std::uint32_t factor) {
  require(x.shape.size() == 3, ErrorKind::kShapeMismatch, "upsample needs [h, w, c]");
  const std::uint32_t H = x.shape[0] * factor, W = x.shape[1] * factor, C = x.shape[2];
  RingTensor out = RingTensor::zeros(x.params, {H, W, C});
  for (std::uint32_t y = 0; y < H; ++y) {
    for (std::uint32_t xx = 0; xx < W; ++xx) {
      for (std::uint32_t c = 0; c < C; ++c) {
        out.data[(std::size_t{y} * W + xx) * C + c] =
            x.data[(std::size_t{y / factor} * x.shape[1] + xx / factor) * C + c];
      }
    }
  }
  return out;
}

RingTensor truncate(const RingTensor& v, int shift, const OracleOptions& opt) {
  RingTensor out = v;
  const RingParams& p = v.params;
  if (opt.mode == TruncMode::kCanonical) {
    for (Word& w : out.data) w = ring::arith_shift(w, shift, p);
    return out;
  }
  require(opt.tape != nullptr, ErrorKind::kUsage, "lockstep oracle needs a tape");
  const auto& s1 = opt.tape->next();
  require(s1.size() == v.size(), ErrorKind::kShapeMismatch,
          "tape entry does not match the truncated tensor");
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.data[i] = lockstep_share_trunc(v.data[i], s1[i], shift, p);
  }
  return out;
}

RingTensor lrelu(const RingTensor& z, std::uint32_t alpha_shift, const OracleOptions& opt) {
  const RingParams& p = z.params;
  RingTensor scaled = z;
  const auto shift = static_cast<int>(alpha_shift);
  if (opt.lrelu == gc::LreluMode::kLocalScale) {
    scaled = truncate(z, shift, opt);
  } else {
    for (Word& w : scaled.data) w = ring::arith_shift(w, shift, p);
  }
  RingTensor out = z;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (ring::is_negative(z.data[i], p)) out.data[i] = scaled.data[i];
  }
  return out;
}

Word dissimilarity(const RingTensor& x, const RingTensor& xbar, const OracleOptions& opt) {
  require(x.shape == xbar.shape, ErrorKind::kShapeMismatch,
          "dissimilarity of " + shape_string(x.shape) + " and " + shape_string(xbar.shape));
  const RingParams& p = x.params;
  Word acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Word o = ring::sub(x.data[i], xbar.data[i], p);
    acc += o * o;
  }
  return truncate(RingTensor{p, {1}, {acc & p.mask()}}, p.f, opt).data[0];
}

OracleTrace oracle_forward(const model::ReconstructorSpec& spec, const model::WeightSet& ws,
                           const RingTensor& image, const OracleOptions& opt) {
  model::check_weights(spec, ws);
  require(image.shape == spec.input_shape, ErrorKind::kShapeMismatch,
          "image " + shape_string(image.shape) + " does not fit model input " +
              shape_string(spec.input_shape));
  require(image.params == spec.params, ErrorKind::kParamsMismatch,
          "image ring parameters differ from the model");
  const RingParams& p = spec.params;
  OracleTrace trace;
  RingTensor cur = image;
  std::size_t t = 0;
  for (const auto& l : spec.layers) {
    if (l.kind == model::LayerKind::kUpsample) {
      cur = upsample(cur, l.factor);
    } else {
      const auto& lw = ws.layers[t++];
      cur = truncate(conv_direct(cur, lw.kernel, l.stride), p.f, opt);
      if (lw.bias) {
        const std::size_t co = lw.bias->size();
        for (std::size_t i = 0; i < cur.size(); ++i) {
          cur.data[i] = ring::add(cur.data[i], lw.bias->data[i % co], p);
        }
      }
      if (l.activation == model::Activation::kLrelu) cur = lrelu(cur, l.alpha_shift, opt);
    }
    trace.layers.push_back(cur);
  }
  trace.dissimilarity = dissimilarity(image, cur, opt);
  return trace;
}

std::vector<double> float_forward(const model::ReconstructorSpec& spec,
                                  const std::vector<model::FloatLayer>& weights,
                                  const std::vector<double>& image) {
  require(image.size() == shape_size(spec.input_shape), ErrorKind::kShapeMismatch,
          "image size does not fit the model");
  std::vector<double> cur = image;
  Shape shape = spec.input_shape;
  std::size_t t = 0;
  for (const auto& l : spec.layers) {
    const std::uint32_t H = shape[0], W = shape[1], C = shape[2];
    if (l.kind == model::LayerKind::kUpsample) {
      const std::uint32_t f = l.factor;
      std::vector<double> out(std::size_t{H} * f * W * f * C);
      for (std::uint32_t y = 0; y < H * f; ++y) {
        for (std::uint32_t x = 0; x < W * f; ++x) {
          for (std::uint32_t c = 0; c < C; ++c) {
            out[(std::size_t{y} * W * f + x) * C + c] =
                cur[(std::size_t{y / f} * W + x / f) * C + c];
          }
        }
      }
      cur = std::move(out);
      shape = {H * f, W * f, C};
      continue;
    }
    const auto& fl = weights.at(t++);
    const std::uint32_t KH = l.shape[0], KW = l.shape[1], CO = l.shape[3];
    const Same sy = same_padding(H, KH, l.stride), sx = same_padding(W, KW, l.stride);
    std::vector<double> out(std::size_t{sy.out} * sx.out * CO);
    for (std::uint32_t oy = 0; oy < sy.out; ++oy) {
      for (std::uint32_t ox = 0; ox < sx.out; ++ox) {
        for (std::uint32_t co = 0; co < CO; ++co) {
          double acc = fl.bias.empty() ? 0.0 : fl.bias[co];
          for (std::uint32_t ky = 0; ky < KH; ++ky) {
            const std::int64_t iy = std::int64_t{oy} * l.stride + ky - sy.pad;
            if (iy < 0 || iy >= H) continue;
            for (std::uint32_t kx = 0; kx < KW; ++kx) {
              const std::int64_t ix = std::int64_t{ox} * l.stride + kx - sx.pad;
              if (ix < 0 || ix >= W) continue;
              for (std::uint32_t ci = 0; ci < C; ++ci) {
                acc += cur[(iy * W + ix) * C + ci] *
                       fl.kernel[((std::size_t{ky} * KW + kx) * C + ci) * CO + co];
              }
            }
          }
          if (l.activation == model::Activation::kLrelu && acc < 0) {
            acc = std::ldexp(acc, -static_cast<int>(l.alpha_shift));
          }
          out[(std::size_t{oy} * sx.out + ox) * CO + co] = acc;
        }
      }
    }
    cur = std::move(out);
    shape = {sy.out, sx.out, CO};
  }
  return cur;
}

OraclePrediction oracle_predict(const std::vector<OracleModel>& models,
                                const RingTensor& image, Word global_tau,
                                const std::string& uploader, TruncMode mode,
                                std::vector<TruncationTape>* tapes, gc::LreluMode lrelu) {
  require(!models.empty(), ErrorKind::kUsage, "prediction needs at least one model");
  require(mode == TruncMode::kCanonical || (tapes != nullptr && tapes->size() == models.size()),
          ErrorKind::kUsage, "lockstep prediction needs one tape per model");
  const RingParams& p = image.params;
  OraclePrediction out;
  std::vector<std::string> users;
  for (std::size_t i = 0; i < models.size(); ++i) {
    OracleOptions opt{mode, tapes ? &(*tapes)[i] : nullptr, lrelu};
    out.dissimilarities.push_back(
        oracle_forward(models[i].spec, models[i].weights, image, opt).dissimilarity);
    users.push_back(models[i].spec.user_id);
  }
  for (std::uint32_t i = 1; i < models.size(); ++i) {
    if (ring::to_signed(out.dissimilarities[i], p) <
        ring::to_signed(out.dissimilarities[out.argmin], p)) {
      out.argmin = i;
    }
  }
  const Word tau = models[out.argmin].tau.value_or(global_tau);
  out.flag = ring::to_signed(out.dissimilarities[out.argmin], p) <= ring::to_signed(tau, p);
  out.result = blocking_rule(out.argmin, out.flag, users, uploader);
  return out;
}

}  // namespace privedge::oracle
