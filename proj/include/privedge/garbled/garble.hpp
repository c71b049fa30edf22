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
#include <span>
#include <vector>

#include "privedge/garbled/circuit.hpp"
#include "privedge/garbled/label.hpp"

namespace privedge::gc {

// Garbled material for `copies` independent instances of one circuit.
// Free-XOR with point-and-permute; AND tables are row-reduced to three
// ciphertexts (the row both permute bits select to zero is implicit).
// Each output wire carries two 64-bit tags, one per value, so the evaluator
// can both decode and detect a label that is not valid.
struct GarbledCircuit {
  std::uint32_t copies = 0;
  std::vector<Label> tables;         // [and gate][copy][3]
  std::vector<std::uint64_t> tags;   // [copy][output][2]

  std::size_t wire_bytes() const { return tables.size() * 16 + tags.size() * 8; }
};

class Garbler {
 public:
  Garbler(const BooleanCircuit& circuit, std::uint32_t copies, Rng& rng);

  const GarbledCircuit& garbled() const { return gc_; }
  GarbledCircuit take_garbled() { return std::move(gc_); }
  const Label& delta() const { return delta_; }
  std::uint32_t copies() const { return copies_; }

  // Active labels for an input group; `values` and the result are laid out
  // [copy][bit].
  std::vector<Label> active_labels(const InputGroup& g,
                                   const std::vector<bool>& values) const;
  // Active labels of the constant-one group, [copy].
  std::vector<Label> one_labels() const;
  // (label of 0, label of 1) per wire, [copy][bit].
  std::vector<LabelPair> label_pairs(const InputGroup& g) const;

 private:
  Label zero(WireId w, std::uint32_t copy) const {
    return zero_[std::size_t{w} * copies_ + copy];
  }

  const BooleanCircuit& circuit_;
  std::uint32_t copies_;
  Label delta_;
  std::vector<Label> zero_;  // [wire][copy]
  GarbledCircuit gc_;
};

class Evaluator {
 public:
  Evaluator(const BooleanCircuit& circuit, std::uint32_t copies);

  // Labels laid out [copy][bit].
  void set_input(const InputGroup& g, std::span<const Label> labels);
  void run(const GarbledCircuit& gc);
  // Decoded outputs, [copy][output]. Throws kGarbledTable when an output
  // label matches neither tag.
  std::vector<bool> decode(const GarbledCircuit& gc) const;
  // Observed output labels, [copy][output] (for tests).
  std::vector<Label> output_labels() const;

 private:
  const BooleanCircuit& circuit_;
  std::uint32_t copies_;
  std::vector<Label> labels_;  // [wire][copy]
};

}  // namespace privedge::gc
