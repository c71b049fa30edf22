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

#include "privedge/inference.hpp"

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include "privedge/linear.hpp"
#include "privedge/net/frame.hpp"
#include "privedge/sharing.hpp"

namespace privedge::inference {

namespace {

ShareTensor restamp(const ShareTensor& s, SessionId session) {
  ShareTensor out = s;
  out.session = session;
  return out;
}

// Lane-local randomness: seeded streams in tests, OS entropy otherwise.
std::unique_ptr<Rng> lane_rng(const PredictOptions& opt, Party role, std::size_t lane) {
  return make_rng(opt.seed, 0x1000 * (party_index(role) + 1) + lane);
}

struct LaneRunner {
  const PartyRequest& req;
  const PartyLinks& links;
  const PredictOptions& opt;

  ShareTensor run(std::size_t i) const {
    net::Channel& ch = *links.lanes[i];
    const SessionId sid = ch.session();
    auto rng = lane_rng(opt, req.role, i);
    std::unique_ptr<gc::OtSender> sender;
    std::unique_ptr<gc::OtReceiver> receiver;
    if (req.role == Party::kS1) {
      sender = gc::make_ot_sender(opt.protocol.ot, *rng);
    } else {
      receiver = gc::make_ot_receiver(opt.protocol.ot, *rng);
    }
    TruncationTape* tape =
        opt.tapes != nullptr && req.role == Party::kS1 ? &(*opt.tapes)[i] : nullptr;
    gc::GcContext ctx{req.role, &ch, rng.get(), sender.get(), receiver.get(),
                      opt.protocol.lrelu, tape};
    const ShareTensor x = restamp(req.image, sid);
    const ShareTensor xbar = private_reconstruct(*req.models[i], x, *req.triples[i], ctx);
    return secure_dissimilarity(x, xbar, *req.triples[i], ch, tape);
  }
};

void check_request(const PartyRequest& req, const PartyLinks& links,
                   const PredictOptions& opt) {
  require(!req.models.empty(), ErrorKind::kUsage, "no registered models");
  const std::size_t n = req.models.size();
  require(req.triples.size() == n && links.lanes.size() == n && links.control != nullptr,
          ErrorKind::kUsage, "one triple store and one lane per model are required");
  require(opt.tapes == nullptr || opt.tapes->size() == n, ErrorKind::kUsage,
          "one tape per model");
  const RingParams& p = req.image.params();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = *req.models[i];
    require(m.owner == req.role, ErrorKind::kSessionMismatch,
            "model shares of " + m.user_id + " belong to the other party");
    require(m.spec.params == p, ErrorKind::kParamsMismatch,
            "model " + m.user_id + " uses a different ring than the image");
    require(m.spec.input_shape == req.image.shape(), ErrorKind::kShapeMismatch,
            "image " + shape_string(req.image.shape()) + " does not fit model " + m.user_id);
    require(m.tau.has_value() || req.tau.has_value(), ErrorKind::kUsage,
            "no threshold for model " + m.user_id);
    // The whole budget must be present before any online message is sent.
    std::map<TripleShape, std::size_t> need;
    for (const auto& s : model::triple_plan(m.spec)) ++need[s];
    for (const auto& [shape, count] : need) {
      if (req.triples[i]->available(shape) < count) {
        fail(ErrorKind::kTripleExhausted,
             "model " + m.user_id + " lacks triples of shape " + shape_string(shape.dims()));
      }
    }
  }
  require(req.image.owner == req.role, ErrorKind::kSessionMismatch,
          "image share belongs to the other party");
}

}  // namespace

SessionId lane_session(SessionId s, std::size_t lane) { return {s.lo + lane + 1, s.hi}; }

net::Hello ProtocolConfig::hello(Party role, const RingParams& params,
                                 const std::vector<net::ManifestHash>& manifests) const {
  net::Hello h;
  h.role = role;
  h.params = params;
  h.ot_mode = static_cast<std::uint8_t>(ot.mode);
  h.ot_bits = static_cast<std::uint16_t>(ot.modulus_bits);
  h.lrelu_mode = static_cast<std::uint8_t>(lrelu);
  h.manifests = manifests;
  return h;
}

ShareTensor private_reconstruct(const model::ModelShares& m, const ShareTensor& image,
                                TripleStore& triples, gc::GcContext& ctx) {
  const SessionId sid = image.session;
  ShareTensor cur = image;
  std::size_t t = 0;
  for (const auto& l : m.spec.layers) {
    if (l.kind == model::LayerKind::kUpsample) {
      cur = linear::upsample_nn(cur, l.factor);
      continue;
    }
    const auto g = linear::ConvGeometry::make(cur.shape(), l.shape, l.stride);
    const ShareTensor kernel = restamp(m.kernels[t], sid);
    std::optional<ShareTensor> bias;
    if (m.biases[t]) bias = restamp(*m.biases[t], sid);
    const BeaverTriple triple = triples.take(g.triple_shape());
    cur = linear::secure_conv(cur, kernel, l.stride, triple, *ctx.channel, ctx.tape,
                              bias ? &*bias : nullptr);
    if (l.activation == model::Activation::kLrelu) {
      cur = gc::eval_lrelu(cur, l.alpha_shift, ctx);
    }
    ++t;
  }
  return cur;
}

ShareTensor secure_dissimilarity(const ShareTensor& x, const ShareTensor& xbar,
                                 TripleStore& triples, net::Channel& channel,
                                 TruncationTape* tape) {
  require(x.shape() == xbar.shape(), ErrorKind::kShapeMismatch,
          "dissimilarity of " + shape_string(x.shape()) + " and " +
              shape_string(xbar.shape()));
  const RingParams& p = x.params();
  const ShareTensor o = sharing::local_sub(x, xbar);
  const BeaverTriple triple =
      triples.take(TripleShape::elementwise(static_cast<std::uint32_t>(o.size())));
  const ShareTensor sq = linear::secure_mul(o, o, triple, channel);
  Word acc = 0;
  for (Word w : sq.value.data) acc += w;
  ShareTensor d{RingTensor{p, {1}, {acc & p.mask()}}, x.owner, x.session};
  if (tape != nullptr && d.owner == Party::kS1) tape->record(d.value.data);
  return sharing::truncate(d, p.f);
}

PartyOutcome predict(const PartyRequest& req, const PartyLinks& links,
                     const PredictOptions& opt) {
  std::vector<net::Channel*> all = links.lanes;
  all.push_back(links.control);
  auto abort_all = [&](const std::string& why) {
    for (auto* ch : all) ch->abort(why);
  };
  try {
    check_request(req, links, opt);
  } catch (const Error& e) {
    abort_all(std::string(error_kind_name(e.kind())));
    throw;
  }

  const std::size_t n = req.models.size();
  const LaneRunner runner{req, links, opt};
  std::vector<std::optional<ShareTensor>> d(n);
  if (opt.parallel && n > 1) {
    std::mutex mu;
    std::optional<Error> first;
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n; ++i) {
      threads.emplace_back([&, i] {
        try {
          d[i] = runner.run(i);
        } catch (const Error& e) {
          links.lanes[i]->abort(std::string(error_kind_name(e.kind())));
          std::lock_guard lock(mu);
          if (!first) {
            first = e;
            for (auto* ch : all) ch->interrupt();
          }
        } catch (const std::exception& e) {
          links.lanes[i]->abort("internal");
          std::lock_guard lock(mu);
          if (!first) {
            first = Error(ErrorKind::kAborted, e.what());
            for (auto* ch : all) ch->interrupt();
          }
        }
      });
    }
    for (auto& t : threads) t.join();
    if (first) {
      abort_all(std::string(error_kind_name(first->kind())));
      throw *first;
    }
  } else {
    try {
      for (std::size_t i = 0; i < n; ++i) d[i] = runner.run(i);
    } catch (const Error& e) {
      abort_all(std::string(error_kind_name(e.kind())));
      throw;
    }
  }

  // Barrier passed: every lane produced its dissimilarity share.
  const RingParams& p = req.image.params();
  const SessionId sid = links.control->session();
  ShareTensor ds{RingTensor::zeros(p, {static_cast<std::uint32_t>(n)}), req.role, sid};
  ShareTensor taus = ds;
  std::vector<std::string> users;
  for (std::size_t i = 0; i < n; ++i) {
    ds.value.data[i] = d[i]->value.data[0];
    const auto& tau = req.models[i]->tau ? *req.models[i]->tau : *req.tau;
    taus.value.data[i] = tau.value.data[0];
    users.push_back(req.models[i]->user_id);
  }
  try {
    auto rng = lane_rng(opt, req.role, n);
    std::unique_ptr<gc::OtSender> sender;
    std::unique_ptr<gc::OtReceiver> receiver;
    if (req.role == Party::kS1) {
      sender = gc::make_ot_sender(opt.protocol.ot, *rng);
    } else {
      receiver = gc::make_ot_receiver(opt.protocol.ot, *rng);
    }
    gc::GcContext ctx{req.role, links.control, rng.get(), sender.get(), receiver.get(),
                      opt.protocol.lrelu, nullptr};
    const gc::ArgminResult r = gc::eval_argmin_threshold(ds, taus, ctx);
    return {blocking_rule(r.index, r.flag, users, req.uploader), r.index, r.flag};
  } catch (const Error& e) {
    abort_all(std::string(error_kind_name(e.kind())));
    throw;
  }
}

namespace {

struct OtCost {
  std::uint64_t s1_bytes = 0, s2_bytes = 0, s1_frames = 0, s2_frames = 0;

  void s1(std::size_t body) {
    s1_bytes += net::frame_wire_bytes(body);
    ++s1_frames;
  }
  void s2(std::size_t body) {
    s2_bytes += net::frame_wire_bytes(body);
    ++s2_frames;
  }
};

// Frames of one RSA-blinding OT batch of m messages, sender side `sender_s1`.
void rsa_batch(OtCost& c, std::size_t m, std::size_t nb, bool sender_s1) {
  const std::size_t offer = 1 + 2 + 4 + nb + 4 + m * 2 * nb;
  const std::size_t blind = 1 + 4 + m * nb;
  const std::size_t masked = 1 + 4 + m * 2 * nb;
  if (sender_s1) {
    c.s1(offer);
    c.s2(blind);
    c.s1(masked);
  } else {
    c.s2(offer);
    c.s1(blind);
    c.s2(masked);
  }
}

// One OT instance per lane; the extension runs its base OTs on first use.
struct OtInstance {
  const gc::OtConfig& cfg;
  OtCost& cost;
  bool based = false;

  void batch(std::size_t m) {
    const std::size_t nb = static_cast<std::size_t>(cfg.modulus_bits) / 8;
    if (cfg.mode == gc::OtMode::kRsa) {
      rsa_batch(cost, m, nb, true);
      return;
    }
    if (!based) {
      rsa_batch(cost, 128, nb, false);
      based = true;
    }
    cost.s2(1 + 4 + 128 * ((m + 7) / 8));
    cost.s1(1 + 4 + m * 32);
  }
};

}  // namespace

TrafficModel analytic_traffic(const std::vector<model::ReconstructorSpec>& specs,
                              const ProtocolConfig& cfg) {
  require(!specs.empty(), ErrorKind::kUsage, "no models");
  const RingParams& p = specs.front().params;
  const std::size_t k = static_cast<std::size_t>(p.k);
  OtCost c;
  TrafficModel t;
  const std::size_t hello = net::encode_hello(cfg.hello(Party::kS1, p, std::vector<net::ManifestHash>(specs.size()))).size();
  // Control lane and every model lane open with a hello each way.
  for (std::size_t i = 0; i <= specs.size(); ++i) {
    c.s1(hello);
    c.s2(hello);
  }
  for (const auto& spec : specs) {
    OtInstance ot{cfg.ot, c};
    Shape cur = spec.input_shape;
    for (const auto& l : spec.layers) {
      if (l.kind == model::LayerKind::kUpsample) {
        cur = {cur[0] * l.factor, cur[1] * l.factor, cur[2]};
        continue;
      }
      const auto g = linear::ConvGeometry::make(cur, l.shape, l.stride);
      const std::size_t open = linear::masked_open_body_bytes(g.triple_shape(), p);
      c.s1(open);
      c.s2(open);
      ++t.triples;
      cur = g.output_shape();
      if (l.activation == model::Activation::kLrelu) {
        const auto copies = static_cast<std::uint32_t>(shape_size(cur));
        const auto circuit = gc::build_lrelu_circuit(p, l.alpha_shift, cfg.lrelu);
        c.s1(gc::garbled_body_bytes(circuit, copies));
        ot.batch(circuit.input_width(gc::InputOwner::kEvaluator) * copies);
      }
    }
    const auto diss = TripleShape::elementwise(static_cast<std::uint32_t>(shape_size(cur)));
    const std::size_t open = linear::masked_open_body_bytes(diss, p);
    c.s1(open);
    c.s2(open);
    ++t.triples;
  }
  const auto n = static_cast<std::uint32_t>(specs.size());
  const auto circuit = gc::build_argmin_threshold_circuit(n, p);
  OtInstance ot{cfg.ot, c};
  c.s1(gc::garbled_body_bytes(circuit, 1));
  ot.batch(2 * n * k);
  c.s2(4 + 1);  // result frame
  t.s1_bytes = c.s1_bytes;
  t.s2_bytes = c.s2_bytes;
  t.s1_frames = c.s1_frames;
  t.s2_frames = c.s2_frames;
  return t;
}

LoopbackRun run_loopback(const LoopbackInputs& in, const LoopbackOptions& opt) {
  const std::size_t n = in.models.size();
  net::ChannelOptions copt{opt.recv_timeout, 0};
  std::vector<std::unique_ptr<net::Channel>> c1, c2;
  for (std::size_t lane = 0; lane <= n; ++lane) {
    const SessionId sid = lane < n ? lane_session(in.session, lane) : in.session;
    auto [a, b] = net::make_channel_pair(sid, copt);
    if (opt.filter) {
      if (auto f = opt.filter(Party::kS1, lane)) a->set_filter(f);
      if (auto f = opt.filter(Party::kS2, lane)) b->set_filter(f);
    }
    c1.push_back(std::move(a));
    c2.push_back(std::move(b));
  }

  std::vector<net::ManifestHash> manifests;
  for (const auto& [m1, m2] : in.models) {
    (void)m2;
    manifests.push_back(m1->manifest_hash());
  }
  const RingParams& p = in.image.first.params();

  LoopbackRun run;
  auto party = [&](Party role, std::vector<std::unique_ptr<net::Channel>>& chans,
                   std::optional<PartyOutcome>& out, std::optional<ErrorKind>& err) {
    PartyRequest req;
    req.role = role;
    req.session = in.session;
    req.uploader = in.uploader;
    const bool s1 = role == Party::kS1;
    req.image = s1 ? in.image.first : in.image.second;
    if (in.tau) req.tau = s1 ? in.tau->first : in.tau->second;
    for (std::size_t i = 0; i < n; ++i) {
      req.models.push_back(s1 ? in.models[i].first : in.models[i].second);
      req.triples.push_back(s1 ? in.triples[i].first : in.triples[i].second);
    }
    PartyLinks links;
    for (std::size_t i = 0; i < n; ++i) links.lanes.push_back(chans[i].get());
    links.control = chans[n].get();
    PredictOptions popt = opt.predict;
    if (!s1) popt.tapes = nullptr;
    try {
      const net::Hello mine = popt.protocol.hello(role, p, manifests);
      // Every lane opens with a hello, as over TCP.
      for (auto& ch : chans) net::handshake(*ch, mine);
      out = predict(req, links, popt);
    } catch (const Error& e) {
      for (auto& ch : chans) ch->abort(std::string(error_kind_name(e.kind())));
      err = e.kind();
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  std::thread t2([&] { party(Party::kS2, c2, run.s2, run.s2_error); });
  party(Party::kS1, c1, run.s1, run.s1_error);
  t2.join();
  run.online_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  for (std::size_t i = 0; i <= n; ++i) {
    run.s1_bytes += c1[i]->stats().bytes_sent;
    run.s2_bytes += c2[i]->stats().bytes_sent;
    run.s1_frames += c1[i]->stats().frames_sent;
    run.s2_frames += c2[i]->stats().frames_sent;
  }
  return run;
}

}  // namespace privedge::inference
