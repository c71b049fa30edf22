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

#include "privedge/garbled/protocol.hpp"

#include "privedge/audit.hpp"
#include "privedge/error.hpp"

namespace privedge::gc {
namespace {

std::vector<bool> word_bits(const std::vector<Word>& words, std::uint32_t k) {
  std::vector<bool> out;
  out.reserve(words.size() * k);
  for (Word w : words) {
    for (std::uint32_t i = 0; i < k; ++i) out.push_back(((w >> i) & 1) != 0);
  }
  return out;
}

// Garbler side: garbled tables, output tags, and the garbler's active input
// labels for every garbler-owned group in circuit order.
void send_garbled(net::Channel& ch, const BooleanCircuit& c, const Garbler& g,
                  const std::vector<std::vector<Label>>& garbler_labels) {
  const GarbledCircuit& gc = g.garbled();
  std::size_t label_count = 0;
  for (const auto& l : garbler_labels) label_count += l.size();
  ByteWriter w;
  w.buffer().reserve(garbled_body_bytes(c, gc.copies));
  w.u32(gc.copies);
  w.u32(static_cast<std::uint32_t>(c.and_count()));
  w.u32(static_cast<std::uint32_t>(c.outputs().size()));
  w.u32(static_cast<std::uint32_t>(label_count));
  for (const Label& l : gc.tables) write_label(w, l);
  for (std::uint64_t t : gc.tags) w.u64(t);
  for (const auto& group : garbler_labels) {
    for (const Label& l : group) write_label(w, l);
  }
  ch.send(net::MessageType::kGarbledCircuit, w.take());
}

struct ReceivedGarbled {
  GarbledCircuit gc;
  std::vector<Label> garbler_labels;
};

ReceivedGarbled recv_garbled(net::Channel& ch, const BooleanCircuit& c,
                             std::uint32_t copies) {
  const auto body = ch.recv(net::MessageType::kGarbledCircuit);
  require(body.size() == garbled_body_bytes(c, copies), ErrorKind::kGarbledTable,
          "garbled circuit body has unexpected size " + std::to_string(body.size()));
  ByteReader r(body);
  const std::size_t garbler_width = c.input_width(InputOwner::kGarbler);
  require(r.u32() == copies && r.u32() == c.and_count() &&
              r.u32() == c.outputs().size() && r.u32() == garbler_width * copies,
          ErrorKind::kGarbledTable, "garbled circuit header does not match");
  ReceivedGarbled out;
  out.gc.copies = copies;
  out.gc.tables.resize(c.and_count() * copies * 3);
  for (Label& l : out.gc.tables) l = read_label(r);
  out.gc.tags.resize(std::size_t{copies} * c.outputs().size() * 2);
  for (std::uint64_t& t : out.gc.tags) t = r.u64();
  out.garbler_labels.resize(garbler_width * copies);
  for (Label& l : out.garbler_labels) l = read_label(r);
  r.expect_done();
  return out;
}

// Fills the evaluator's input groups from the garbler's labels and the OT
// result, both concatenated in circuit group order.
void load_inputs(Evaluator& e, const BooleanCircuit& c, std::uint32_t copies,
                 const std::vector<Label>& garbler, const std::vector<Label>& evaluator) {
  std::size_t gpos = 0, epos = 0;
  for (const auto& group : c.inputs()) {
    const std::size_t n = group.wires.size() * copies;
    if (group.owner == InputOwner::kGarbler) {
      e.set_input(group, std::span(garbler).subspan(gpos, n));
      gpos += n;
    } else {
      e.set_input(group, std::span(evaluator).subspan(epos, n));
      epos += n;
    }
  }
}

void require_context(const GcContext& ctx) {
  require(ctx.channel != nullptr && ctx.rng != nullptr, ErrorKind::kUsage,
          "garbled protocol context is incomplete");
  if (ctx.role == Party::kS1) {
    require(ctx.ot_sender != nullptr, ErrorKind::kUsage, "s1 needs an OT sender");
  } else {
    require(ctx.ot_receiver != nullptr, ErrorKind::kUsage, "s2 needs an OT receiver");
  }
}

// Runs one garbled evaluation. `inputs` maps every group this party owns
// (constant group excluded) to its [copy][bit] values. Returns the decoded
// output bits on s2 and an empty vector on s1.
std::vector<bool> run_circuit(const BooleanCircuit& c, std::uint32_t copies,
                              const std::vector<std::vector<bool>>& inputs,
                              GcContext& ctx) {
  require(inputs.size() == c.inputs().size(), ErrorKind::kUsage, "input group count");
  if (ctx.role == Party::kS1) {
    Garbler g(c, copies, *ctx.rng);
    std::vector<std::vector<Label>> labels;
    std::vector<LabelPair> pairs;
    for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
      const auto& group = c.inputs()[gi];
      if (static_cast<int>(gi) == c.one_group()) {
        labels.push_back(g.one_labels());
      } else if (group.owner == InputOwner::kGarbler) {
        labels.push_back(g.active_labels(group, inputs[gi]));
      } else {
        const auto p = g.label_pairs(group);
        pairs.insert(pairs.end(), p.begin(), p.end());
      }
    }
    send_garbled(*ctx.channel, c, g, labels);
    ctx.ot_sender->send(*ctx.channel, pairs);
    return {};
  }
  ReceivedGarbled rg = recv_garbled(*ctx.channel, c, copies);
  std::vector<bool> choices;
  for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
    if (c.inputs()[gi].owner != InputOwner::kEvaluator) continue;
    require(inputs[gi].size() == c.inputs()[gi].wires.size() * copies, ErrorKind::kUsage,
            "evaluator input width");
    choices.insert(choices.end(), inputs[gi].begin(), inputs[gi].end());
  }
  const std::vector<Label> ot_labels = ctx.ot_receiver->receive(*ctx.channel, choices);
  Evaluator e(c, copies);
  load_inputs(e, c, copies, rg.garbler_labels, ot_labels);
  e.run(rg.gc);
  return e.decode(rg.gc);
}

}  // namespace

std::size_t garbled_body_bytes(const BooleanCircuit& c, std::uint32_t copies) {
  return 16 + c.and_count() * copies * 3 * 16 +
         std::size_t{copies} * c.outputs().size() * 2 * 8 +
         c.input_width(InputOwner::kGarbler) * copies * 16;
}

ShareTensor eval_lrelu(const ShareTensor& z, std::uint32_t alpha_shift,
                       GcContext& ctx) {
  require_context(ctx);
  require(z.owner == ctx.role, ErrorKind::kSessionMismatch,
          "share owner does not match the protocol role");
  const RingParams& p = z.params();
  const auto k = static_cast<std::uint32_t>(p.k);
  const auto copies = static_cast<std::uint32_t>(z.size());
  if (copies == 0) return z;
  const BooleanCircuit c = build_lrelu_circuit(p, alpha_shift, ctx.mode);

  std::vector<std::vector<bool>> inputs(c.inputs().size());
  auto set = [&](const std::string& name, const std::vector<Word>& words) {
    for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
      if (c.inputs()[gi].name == name) inputs[gi] = word_bits(words, k);
    }
  };
  const int party = party_index(ctx.role);
  auto scaled = [&] {
    std::vector<Word> a(z.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = truncate_share(z.value.data[i], party, static_cast<int>(alpha_shift), p);
    }
    return a;
  };

  ShareTensor out{RingTensor{p, z.shape(), std::vector<Word>(z.size())}, z.owner,
                  z.session};
  if (ctx.role == Party::kS1) {
    for (Word& w : out.value.data) w = ctx.rng->next_word(p);
    set("z1", z.value.data);
    set("r", out.value.data);
    if (ctx.mode == LreluMode::kLocalScale) {
      if (ctx.tape != nullptr) ctx.tape->record(z.value.data);
      set("a1", scaled());
    }
    run_circuit(c, copies, inputs, ctx);
    return out;
  }
  set("z2", z.value.data);
  if (ctx.mode == LreluMode::kLocalScale) set("a2", scaled());
  const std::vector<bool> bits = run_circuit(c, copies, inputs, ctx);
  for (std::uint32_t i = 0; i < copies; ++i) {
    out.value.data[i] = from_bits(bits, std::size_t{i} * k, k);
  }
  return out;
}

ArgminResult eval_argmin_threshold(const ShareTensor& d, const ShareTensor& tau,
                                   GcContext& ctx) {
  require_context(ctx);
  require(d.owner == ctx.role && tau.owner == ctx.role, ErrorKind::kSessionMismatch,
          "share owner does not match the protocol role");
  require(d.shape().size() == 1 && tau.shape() == d.shape() && d.size() >= 1,
          ErrorKind::kShapeMismatch, "argmin expects [n] distances and thresholds");
  require(d.params() == tau.params(), ErrorKind::kParamsMismatch,
          "distance and threshold rings differ");
  const RingParams& p = d.params();
  const auto k = static_cast<std::uint32_t>(p.k);
  const auto n = static_cast<std::uint32_t>(d.size());
  const BooleanCircuit c = build_argmin_threshold_circuit(n, p);

  std::vector<std::vector<bool>> inputs(c.inputs().size());
  for (std::size_t gi = 0; gi < c.inputs().size(); ++gi) {
    const std::string& name = c.inputs()[gi].name;
    const bool mine = (ctx.role == Party::kS1) == (name.back() == '1');
    if (!mine || name == "one") continue;
    inputs[gi] = word_bits(name[0] == 'd' ? d.value.data : tau.value.data, k);
  }

  const std::uint32_t ib = index_bits(n);
  if (ctx.role == Party::kS1) {
    run_circuit(c, 1, inputs, ctx);
    const auto body = ctx.channel->recv(net::MessageType::kResult);
    ByteReader r(body);
    ArgminResult res;
    res.index = r.u32();
    const std::uint8_t flag = r.u8();
    r.expect_done();
    require(res.index < n && flag <= 1, ErrorKind::kDecode, "invalid result frame");
    res.flag = flag == 1;
    return res;
  }
  const std::vector<bool> bits = run_circuit(c, 1, inputs, ctx);
  Audit::instance().record_revealed_bits(bits.size());
  ArgminResult res;
  res.index = static_cast<std::uint32_t>(from_bits(bits, 0, ib));
  res.flag = bits[ib];
  require(res.index < n, ErrorKind::kGarbledTable, "decoded index out of range");
  ByteWriter w;
  w.u32(res.index);
  w.u8(res.flag ? 1 : 0);
  ctx.channel->send(net::MessageType::kResult, w.take());
  return res;
}

}  // namespace privedge::gc
