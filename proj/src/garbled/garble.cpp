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

#include "privedge/garbled/garble.hpp"

#include "privedge/error.hpp"

namespace privedge::gc {

Garbler::Garbler(const BooleanCircuit& circuit, std::uint32_t copies, Rng& rng)
    : circuit_(circuit), copies_(copies) {
  require(copies >= 1, ErrorKind::kUsage, "garbling zero copies");
  delta_ = random_label(rng);
  delta_.lo |= 1;
  zero_.resize(std::size_t{circuit.num_wires()} * copies);
  for (const auto& g : circuit.inputs()) {
    for (WireId w : g.wires) {
      for (std::uint32_t c = 0; c < copies; ++c) zero_[std::size_t{w} * copies + c] = random_label(rng);
    }
  }

  gc_.copies = copies;
  gc_.tables.resize(circuit.and_count() * copies * 3);
  FixedKeyHash hash;
  std::vector<Label> keys(std::size_t{4} * copies);
  const std::uint64_t num_gates = circuit.gates().size();
  std::size_t and_index = 0;
  for (std::size_t gi = 0; gi < circuit.gates().size(); ++gi) {
    const Gate& g = circuit.gates()[gi];
    Label* out = &zero_[std::size_t{g.out} * copies];
    const Label* a = &zero_[std::size_t{g.a} * copies];
    const Label* b = &zero_[std::size_t{g.b} * copies];
    if (g.kind == GateKind::kXor) {
      for (std::uint32_t c = 0; c < copies; ++c) out[c] = a[c] ^ b[c];
      continue;
    }
    if (g.kind == GateKind::kNot) {
      for (std::uint32_t c = 0; c < copies; ++c) out[c] = a[c] ^ delta_;
      continue;
    }
    // Row r = 2 * lsb(A) + lsb(B) holds the entry for input values
    // (r>>1 ^ pa, r&1 ^ pb).
    for (std::uint32_t c = 0; c < copies; ++c) {
      const bool pa = a[c].lsb(), pb = b[c].lsb();
      for (int r = 0; r < 4; ++r) {
        const Label la = a[c] ^ select(delta_, ((r >> 1) != 0) != pa);
        const Label lb = b[c] ^ select(delta_, ((r & 1) != 0) != pb);
        keys[4 * c + r] = gate_key(la, lb, c * num_gates + gi);
      }
    }
    hash.hash(keys, keys);
    for (std::uint32_t c = 0; c < copies; ++c) {
      const bool pa = a[c].lsb(), pb = b[c].lsb();
      const Label c0 = keys[4 * c] ^ select(delta_, pa && pb);
      Label* row = &gc_.tables[(and_index * copies + c) * 3];
      for (int r = 1; r < 4; ++r) {
        const bool i = ((r >> 1) != 0) != pa;
        const bool j = ((r & 1) != 0) != pb;
        row[r - 1] = keys[4 * c + r] ^ c0 ^ select(delta_, i && j);
      }
      out[c] = c0;
    }
    ++and_index;
  }

  const auto& outs = circuit.outputs();
  std::vector<Label> tag_keys(std::size_t{copies} * outs.size() * 2);
  for (std::uint32_t c = 0; c < copies; ++c) {
    for (std::size_t o = 0; o < outs.size(); ++o) {
      const std::size_t slot = c * outs.size() + o;
      const Label l0 = zero(outs[o], c);
      tag_keys[2 * slot] = tag_key(l0, slot);
      tag_keys[2 * slot + 1] = tag_key(l0 ^ delta_, slot);
    }
  }
  hash.hash(tag_keys, tag_keys);
  gc_.tags.resize(tag_keys.size());
  for (std::size_t i = 0; i < tag_keys.size(); ++i) gc_.tags[i] = tag_keys[i].lo;
}

std::vector<Label> Garbler::active_labels(const InputGroup& g,
                                          const std::vector<bool>& values) const {
  const std::size_t width = g.wires.size();
  require(values.size() == width * copies_, ErrorKind::kUsage,
          "input group '" + g.name + "' expects " + std::to_string(width * copies_) +
              " bits");
  std::vector<Label> out(values.size());
  for (std::uint32_t c = 0; c < copies_; ++c) {
    for (std::size_t i = 0; i < width; ++i) {
      out[c * width + i] = zero(g.wires[i], c) ^ select(delta_, values[c * width + i]);
    }
  }
  return out;
}

std::vector<Label> Garbler::one_labels() const {
  require(circuit_.one_group() >= 0, ErrorKind::kUsage, "circuit has no constant wire");
  const WireId w =
      circuit_.inputs()[static_cast<std::size_t>(circuit_.one_group())].wires[0];
  std::vector<Label> out(copies_);
  for (std::uint32_t c = 0; c < copies_; ++c) out[c] = zero(w, c) ^ delta_;
  return out;
}

std::vector<LabelPair> Garbler::label_pairs(const InputGroup& g) const {
  const std::size_t width = g.wires.size();
  std::vector<LabelPair> out(width * copies_);
  for (std::uint32_t c = 0; c < copies_; ++c) {
    for (std::size_t i = 0; i < width; ++i) {
      const Label l0 = zero(g.wires[i], c);
      out[c * width + i] = {l0, l0 ^ delta_};
    }
  }
  return out;
}

Evaluator::Evaluator(const BooleanCircuit& circuit, std::uint32_t copies)
    : circuit_(circuit), copies_(copies) {
  require(copies >= 1, ErrorKind::kUsage, "evaluating zero copies");
  labels_.resize(std::size_t{circuit.num_wires()} * copies);
}

void Evaluator::set_input(const InputGroup& g, std::span<const Label> labels) {
  const std::size_t width = g.wires.size();
  require(labels.size() == width * copies_, ErrorKind::kGarbledTable,
          "input group '" + g.name + "' received " + std::to_string(labels.size()) +
              " labels");
  for (std::uint32_t c = 0; c < copies_; ++c) {
    for (std::size_t i = 0; i < width; ++i) {
      labels_[std::size_t{g.wires[i]} * copies_ + c] = labels[c * width + i];
    }
  }
}

void Evaluator::run(const GarbledCircuit& gc) {
  require(gc.copies == copies_ &&
              gc.tables.size() == circuit_.and_count() * copies_ * 3 &&
              gc.tags.size() == std::size_t{copies_} * circuit_.outputs().size() * 2,
          ErrorKind::kGarbledTable, "garbled material does not fit the circuit");
  FixedKeyHash hash;
  std::vector<Label> keys(copies_);
  const std::uint64_t num_gates = circuit_.gates().size();
  std::size_t and_index = 0;
  for (std::size_t gi = 0; gi < circuit_.gates().size(); ++gi) {
    const Gate& g = circuit_.gates()[gi];
    Label* out = &labels_[std::size_t{g.out} * copies_];
    const Label* a = &labels_[std::size_t{g.a} * copies_];
    const Label* b = &labels_[std::size_t{g.b} * copies_];
    if (g.kind == GateKind::kXor) {
      for (std::uint32_t c = 0; c < copies_; ++c) out[c] = a[c] ^ b[c];
      continue;
    }
    if (g.kind == GateKind::kNot) {
      for (std::uint32_t c = 0; c < copies_; ++c) out[c] = a[c];
      continue;
    }
    for (std::uint32_t c = 0; c < copies_; ++c) {
      keys[c] = gate_key(a[c], b[c], c * num_gates + gi);
    }
    hash.hash(keys, keys);
    for (std::uint32_t c = 0; c < copies_; ++c) {
      const int r = (a[c].lsb() ? 2 : 0) + (b[c].lsb() ? 1 : 0);
      out[c] = r == 0 ? keys[c]
                      : gc.tables[(and_index * copies_ + c) * 3 + (r - 1)] ^ keys[c];
    }
    ++and_index;
  }
}

std::vector<bool> Evaluator::decode(const GarbledCircuit& gc) const {
  const auto& outs = circuit_.outputs();
  std::vector<Label> keys(std::size_t{copies_} * outs.size());
  for (std::uint32_t c = 0; c < copies_; ++c) {
    for (std::size_t o = 0; o < outs.size(); ++o) {
      const std::size_t slot = c * outs.size() + o;
      keys[slot] = tag_key(labels_[std::size_t{outs[o]} * copies_ + c], slot);
    }
  }
  FixedKeyHash hash;
  hash.hash(keys, keys);
  std::vector<bool> bits(keys.size());
  for (std::size_t slot = 0; slot < keys.size(); ++slot) {
    if (keys[slot].lo == gc.tags[2 * slot]) {
      bits[slot] = false;
    } else if (keys[slot].lo == gc.tags[2 * slot + 1]) {
      bits[slot] = true;
    } else {
      fail(ErrorKind::kGarbledTable,
           "output label " + std::to_string(slot) + " has no valid decryption");
    }
  }
  return bits;
}

std::vector<Label> Evaluator::output_labels() const {
  const auto& outs = circuit_.outputs();
  std::vector<Label> out(std::size_t{copies_} * outs.size());
  for (std::uint32_t c = 0; c < copies_; ++c) {
    for (std::size_t o = 0; o < outs.size(); ++o) {
      out[c * outs.size() + o] = labels_[std::size_t{outs[o]} * copies_ + c];
    }
  }
  return out;
}

}  // namespace privedge::gc
