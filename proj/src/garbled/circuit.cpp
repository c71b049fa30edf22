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

#include "privedge/garbled/circuit.hpp"

#include <bit>

#include "privedge/error.hpp"

namespace privedge::gc {

Bits BooleanCircuit::add_input(const std::string& name, InputOwner owner,
                               std::uint32_t width) {
  InputGroup g{name, owner, {}};
  for (std::uint32_t i = 0; i < width; ++i) g.wires.push_back(new_wire());
  inputs_.push_back(g);
  return g.wires;
}

WireId BooleanCircuit::one() {
  if (one_group_ < 0) {
    one_group_ = static_cast<int>(inputs_.size());
    add_input("one", InputOwner::kGarbler, 1);
  }
  return inputs_[static_cast<std::size_t>(one_group_)].wires[0];
}

WireId BooleanCircuit::zero() {
  if (!has_zero_) {
    const WireId o = one();
    zero_ = xor_gate(o, o);
    has_zero_ = true;
  }
  return zero_;
}

WireId BooleanCircuit::xor_gate(WireId a, WireId b) {
  const WireId out = new_wire();
  gates_.push_back({GateKind::kXor, a, b, out});
  return out;
}

WireId BooleanCircuit::and_gate(WireId a, WireId b) {
  const WireId out = new_wire();
  gates_.push_back({GateKind::kAnd, a, b, out});
  ++and_count_;
  return out;
}

WireId BooleanCircuit::not_gate(WireId a) {
  const WireId out = new_wire();
  gates_.push_back({GateKind::kNot, a, a, out});
  return out;
}

const InputGroup& BooleanCircuit::group(const std::string& name) const {
  for (const auto& g : inputs_) {
    if (g.name == name) return g;
  }
  fail(ErrorKind::kUsage, "circuit has no input group '" + name + "'");
}

std::size_t BooleanCircuit::input_width(InputOwner owner) const {
  std::size_t n = 0;
  for (const auto& g : inputs_) {
    if (g.owner == owner) n += g.wires.size();
  }
  return n;
}

void BooleanCircuit::validate() const {
  std::vector<std::uint8_t> driven(num_wires_, 0);
  auto drive = [&](WireId w) {
    require(w < num_wires_, ErrorKind::kMalformedSpec, "wire id out of range");
    require(!driven[w], ErrorKind::kMalformedSpec,
            "wire " + std::to_string(w) + " driven twice");
    driven[w] = 1;
  };
  auto use = [&](WireId w) {
    require(w < num_wires_ && driven[w], ErrorKind::kMalformedSpec,
            "wire " + std::to_string(w) + " read before it is driven");
  };
  for (const auto& g : inputs_) {
    for (WireId w : g.wires) drive(w);
  }
  for (const auto& g : gates_) {
    use(g.a);
    if (g.kind != GateKind::kNot) use(g.b);
    drive(g.out);
  }
  for (WireId w : outputs_) use(w);
}

std::vector<bool> evaluate(const BooleanCircuit& c,
                           const std::vector<std::vector<bool>>& inputs) {
  require(inputs.size() == c.inputs().size(), ErrorKind::kUsage,
          "input group count mismatch");
  std::vector<std::uint8_t> v(c.num_wires(), 0);
  for (std::size_t gi = 0; gi < inputs.size(); ++gi) {
    const auto& g = c.inputs()[gi];
    if (static_cast<int>(gi) == c.one_group()) {
      v[g.wires[0]] = 1;
      continue;
    }
    require(inputs[gi].size() == g.wires.size(), ErrorKind::kUsage,
            "input group '" + g.name + "' has wrong width");
    for (std::size_t i = 0; i < g.wires.size(); ++i) v[g.wires[i]] = inputs[gi][i];
  }
  for (const auto& g : c.gates()) {
    switch (g.kind) {
      case GateKind::kXor: v[g.out] = v[g.a] ^ v[g.b]; break;
      case GateKind::kAnd: v[g.out] = v[g.a] & v[g.b]; break;
      case GateKind::kNot: v[g.out] = v[g.a] ^ 1; break;
    }
  }
  std::vector<bool> out;
  out.reserve(c.outputs().size());
  for (WireId w : c.outputs()) out.push_back(v[w] != 0);
  return out;
}

// carry_{i+1} = c ^ ((a ^ c) & (b ^ c)); one AND per bit, none for the top.
Bits add_with_carry(BooleanCircuit& c, const Bits& a, const Bits& b, WireId carry_in) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::kUsage, "adder width mismatch");
  Bits sum(a.size());
  WireId carry = carry_in;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const WireId axc = c.xor_gate(a[i], carry);
    const WireId bxc = c.xor_gate(b[i], carry);
    sum[i] = c.xor_gate(axc, b[i]);
    if (i + 1 < a.size()) carry = c.xor_gate(carry, c.and_gate(axc, bxc));
  }
  return sum;
}

Bits add(BooleanCircuit& c, const Bits& a, const Bits& b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::kUsage, "adder width mismatch");
  // Bit 0 has no carry in: half adder.
  Bits sum(a.size());
  sum[0] = c.xor_gate(a[0], b[0]);
  if (a.size() == 1) return sum;
  WireId carry = c.and_gate(a[0], b[0]);
  for (std::size_t i = 1; i < a.size(); ++i) {
    const WireId axc = c.xor_gate(a[i], carry);
    const WireId bxc = c.xor_gate(b[i], carry);
    sum[i] = c.xor_gate(axc, b[i]);
    if (i + 1 < a.size()) carry = c.xor_gate(carry, c.and_gate(axc, bxc));
  }
  return sum;
}

Bits sub(BooleanCircuit& c, const Bits& a, const Bits& b) {
  Bits nb(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) nb[i] = c.not_gate(b[i]);
  return add_with_carry(c, a, nb, c.one());
}

Bits mux(BooleanCircuit& c, WireId sel, const Bits& a, const Bits& b) {
  require(a.size() == b.size(), ErrorKind::kUsage, "mux width mismatch");
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = c.xor_gate(a[i], c.and_gate(sel, c.xor_gate(a[i], b[i])));
  }
  return out;
}

Bits arith_shift_right(const Bits& a, std::uint32_t shift) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = i + shift < a.size() ? a[i + shift] : a.back();
  }
  return out;
}

WireId less_than_signed(BooleanCircuit& c, const Bits& a, const Bits& b) {
  require(a.size() == b.size() && !a.empty(), ErrorKind::kUsage,
          "comparator width mismatch");
  // Sign bit of (a - b) computed over k+1 bits after sign extension. Only
  // the carries matter, so the low sum bits are never formed.
  WireId carry = c.one();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const WireId nb = c.not_gate(b[i]);
    const WireId axc = c.xor_gate(a[i], carry);
    const WireId bxc = c.xor_gate(nb, carry);
    carry = c.xor_gate(carry, c.and_gate(axc, bxc));
  }
  const WireId top = c.xor_gate(a.back(), c.not_gate(b.back()));
  return c.xor_gate(top, carry);
}

Bits constant(BooleanCircuit& c, std::uint64_t value, std::uint32_t width) {
  Bits out(width);
  for (std::uint32_t i = 0; i < width; ++i) {
    out[i] = (value >> i) & 1 ? c.one() : c.zero();
  }
  return out;
}

std::vector<bool> to_bits(std::uint64_t v, std::uint32_t width) {
  std::vector<bool> out(width);
  for (std::uint32_t i = 0; i < width; ++i) out[i] = (v >> i) & 1;
  return out;
}

std::uint64_t from_bits(const std::vector<bool>& bits, std::size_t offset,
                        std::uint32_t width) {
  std::uint64_t v = 0;
  for (std::uint32_t i = 0; i < width; ++i) {
    if (bits.at(offset + i)) v |= std::uint64_t{1} << i;
  }
  return v;
}

BooleanCircuit build_lrelu_circuit(const RingParams& params,
                                   std::uint32_t alpha_shift, LreluMode mode) {
  params.validate();
  const auto k = static_cast<std::uint32_t>(params.k);
  require(alpha_shift < k, ErrorKind::kMalformedSpec, "alpha shift out of range");
  BooleanCircuit c;
  c.one();
  if (mode == LreluMode::kInCircuitShift) {
    const Bits z1 = c.add_input("z1", InputOwner::kGarbler, k);
    const Bits r = c.add_input("r", InputOwner::kGarbler, k);
    const Bits z2 = c.add_input("z2", InputOwner::kEvaluator, k);
    const Bits z = add(c, z1, z2);
    const Bits h = mux(c, z.back(), z, arith_shift_right(z, alpha_shift));
    c.add_outputs(sub(c, h, r));
  } else {
    const Bits z1 = c.add_input("z1", InputOwner::kGarbler, k);
    const Bits a1 = c.add_input("a1", InputOwner::kGarbler, k);
    const Bits r = c.add_input("r", InputOwner::kGarbler, k);
    const Bits z2 = c.add_input("z2", InputOwner::kEvaluator, k);
    const Bits a2 = c.add_input("a2", InputOwner::kEvaluator, k);
    const Bits z = add(c, z1, z2);
    const Bits a = add(c, a1, a2);
    const Bits h = mux(c, z.back(), z, a);
    c.add_outputs(sub(c, h, r));
  }
  return c;
}

std::uint32_t index_bits(std::uint32_t n) {
  require(n >= 1, ErrorKind::kUsage, "argmin over zero candidates");
  // ceil(log2 n), at least one wire so a single candidate still has an index.
  const std::uint32_t lg = n <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(n - 1));
  return lg + 1;
}

BooleanCircuit build_argmin_threshold_circuit(std::uint32_t n,
                                              const RingParams& params) {
  params.validate();
  const auto k = static_cast<std::uint32_t>(params.k);
  const std::uint32_t ib = index_bits(n);
  BooleanCircuit c;
  c.one();
  const Bits d1 = c.add_input("d1", InputOwner::kGarbler, n * k);
  const Bits t1 = c.add_input("t1", InputOwner::kGarbler, n * k);
  const Bits d2 = c.add_input("d2", InputOwner::kEvaluator, n * k);
  const Bits t2 = c.add_input("t2", InputOwner::kEvaluator, n * k);
  auto slice = [&](const Bits& all, std::uint32_t i) {
    return Bits(all.begin() + i * k, all.begin() + (i + 1) * k);
  };

  struct Candidate {
    Bits d, t, idx;
  };
  std::vector<Candidate> round;
  for (std::uint32_t i = 0; i < n; ++i) {
    round.push_back({add(c, slice(d1, i), slice(d2, i)),
                     add(c, slice(t1, i), slice(t2, i)), constant(c, i, ib)});
  }
  // Pairwise tournament; the right entry wins only when strictly smaller, so
  // equal distances resolve to the lower index.
  while (round.size() > 1) {
    std::vector<Candidate> next;
    for (std::size_t i = 0; i + 1 < round.size(); i += 2) {
      const Candidate& l = round[i];
      const Candidate& r = round[i + 1];
      const WireId right_wins = less_than_signed(c, r.d, l.d);
      next.push_back({mux(c, right_wins, l.d, r.d), mux(c, right_wins, l.t, r.t),
                      mux(c, right_wins, l.idx, r.idx)});
    }
    if (round.size() % 2 == 1) next.push_back(round.back());
    round = std::move(next);
  }
  const Candidate& best = round.front();
  c.add_outputs(best.idx);
  c.add_output(c.not_gate(less_than_signed(c, best.t, best.d)));
  return c;
}

}  // namespace privedge::gc
