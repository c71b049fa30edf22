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

#include "privedge/tensor.hpp"

#include <cstdio>
#include <sstream>

#include "privedge/error.hpp"

namespace privedge {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

RingTensor RingTensor::zeros(const RingParams& params, Shape shape) {
  RingTensor t{params, std::move(shape), {}};
  t.data.assign(shape_size(t.shape), 0);
  return t;
}

RingTensor RingTensor::encode(const RingParams& params, Shape shape,
                              const std::vector<double>& values) {
  require(shape_size(shape) == values.size(), ErrorKind::kShapeMismatch,
          "value count does not match shape " + shape_string(shape));
  RingTensor t{params, std::move(shape), {}};
  t.data.reserve(values.size());
  for (double v : values) t.data.push_back(privedge::encode(v, params).value);
  return t;
}

std::vector<double> RingTensor::decode() const {
  std::vector<double> out;
  out.reserve(data.size());
  for (Word w : data) out.push_back(privedge::decode({w}, params));
  return out;
}

const char* party_name(Party p) { return p == Party::kS1 ? "s1" : "s2"; }

std::string SessionId::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

}  // namespace privedge
