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
#include <string>
#include <vector>

#include "privedge/tensor.hpp"

namespace privedge::gc {

using WireId = std::uint32_t;
using Bits = std::vector<WireId>;  // little-endian: bits[0] is the LSB

enum class GateKind : std::uint8_t { kXor, kAnd, kNot };

struct Gate {
  GateKind kind;
  WireId a;
  WireId b;  // unused for kNot
  WireId out;
};

// Garbler inputs are sent as labels, evaluator inputs travel by OT.
enum class InputOwner : std::uint8_t { kGarbler, kEvaluator };

struct InputGroup {
  std::string name;
  InputOwner owner;
  std::vector<WireId> wires;
};

// Boolean circuit in topological order. Built through the helpers below;
// validate() re-checks the structural invariants.
class BooleanCircuit {
 public:
  Bits add_input(const std::string& name, InputOwner owner, std::uint32_t width);
  // Garbler-held wire fixed to 1 (created on first use).
  WireId one();
  WireId zero();

  WireId xor_gate(WireId a, WireId b);
  WireId and_gate(WireId a, WireId b);
  WireId not_gate(WireId a);
  void add_output(WireId w) { outputs_.push_back(w); }
  void add_outputs(const Bits& ws) { outputs_.insert(outputs_.end(), ws.begin(), ws.end()); }

  std::uint32_t num_wires() const { return num_wires_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<InputGroup>& inputs() const { return inputs_; }
  const std::vector<WireId>& outputs() const { return outputs_; }
  std::size_t and_count() const { return and_count_; }
  const InputGroup& group(const std::string& name) const;
  // Index of the constant-one group in inputs(), or -1.
  int one_group() const { return one_group_; }
  std::size_t input_width(InputOwner owner) const;

  // Throws kMalformedSpec unless acyclic, each wire driven once, and every
  // gate input / output wire is driven.
  void validate() const;

 private:
  WireId new_wire() { return num_wires_++; }

  std::uint32_t num_wires_ = 0;
  std::vector<Gate> gates_;
  std::vector<InputGroup> inputs_;
  std::vector<WireId> outputs_;
  std::size_t and_count_ = 0;
  int one_group_ = -1;
  WireId zero_ = 0;
  bool has_zero_ = false;
};

// Cleartext evaluation; `inputs` holds one bit vector per input group in
// declaration order (the constant group may be passed empty).
std::vector<bool> evaluate(const BooleanCircuit& c,
                           const std::vector<std::vector<bool>>& inputs);

// Word helpers.
Bits add(BooleanCircuit& c, const Bits& a, const Bits& b);
Bits add_with_carry(BooleanCircuit& c, const Bits& a, const Bits& b, WireId carry_in);
Bits sub(BooleanCircuit& c, const Bits& a, const Bits& b);
// sel ? b : a
Bits mux(BooleanCircuit& c, WireId sel, const Bits& a, const Bits& b);
Bits arith_shift_right(const Bits& a, std::uint32_t shift);
// Signed two's-complement a < b.
WireId less_than_signed(BooleanCircuit& c, const Bits& a, const Bits& b);
Bits constant(BooleanCircuit& c, std::uint64_t value, std::uint32_t width);

std::vector<bool> to_bits(std::uint64_t v, std::uint32_t width);
std::uint64_t from_bits(const std::vector<bool>& bits, std::size_t offset,
                        std::uint32_t width);

// Activation realisations; see LreluMode.
enum class LreluMode : std::uint8_t {
  kInCircuitShift = 0,  // alpha z computed as an arithmetic shift inside C
  kLocalScale = 1,      // parties scale their shares by alpha locally
};

// L-ReLU followed by the re-sharing subtraction.
//   kInCircuitShift groups: z1 (garbler), r (garbler), z2 (evaluator)
//   kLocalScale groups:     z1, a1, r (garbler), z2, a2 (evaluator)
// Output: L-ReLU(z1 + z2) - r mod 2^k, k wires.
BooleanCircuit build_lrelu_circuit(const RingParams& params,
                                   std::uint32_t alpha_shift,
                                   LreluMode mode = LreluMode::kInCircuitShift);

// Reconstructs d_i and tau_i from shares, runs a comparator tournament with
// lowest-index tie-break, and outputs the winning index
// (index_bits(n) wires) followed by the flag d_min <= tau_min.
//   groups: d1, t1 (garbler), d2, t2 (evaluator), each n*k wires.
BooleanCircuit build_argmin_threshold_circuit(std::uint32_t n,
                                              const RingParams& params);
std::uint32_t index_bits(std::uint32_t n);

}  // namespace privedge::gc
