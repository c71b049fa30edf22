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

#include "privedge/beaver.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "privedge/bytes.hpp"
#include "privedge/error.hpp"
#include "privedge/sharing.hpp"

namespace privedge {
namespace {

constexpr std::uint16_t kTripleFileVersion = 1;
constexpr char kTripleMagic[4] = {'P', 'V', 'T', 'R'};

std::string describe(const TripleShape& s) {
  return shape_string(s.dims());
}

}  // namespace

Shape TripleShape::u_shape() const {
  if (kind == Kind::kElementwise) return {m};
  return {m, n};
}

Shape TripleShape::v_shape() const {
  if (kind == Kind::kElementwise) return {m};
  return {n, p};
}

Shape TripleShape::q_shape() const {
  if (kind == Kind::kElementwise) return {m};
  return {m, p};
}

Shape TripleShape::dims() const {
  if (kind == Kind::kElementwise) return {m};
  return {m, n, p};
}

TripleShape TripleShape::from_dims(const Shape& dims) {
  if (dims.size() == 1) return elementwise(dims[0]);
  if (dims.size() == 3) return matmul(dims[0], dims[1], dims[2]);
  fail(ErrorKind::kDecode, "triple shape must have rank 1 or 3");
}

std::size_t TripleShape::words() const {
  return shape_size(u_shape()) + shape_size(v_shape()) + shape_size(q_shape());
}

TripleStore::TripleStore(TripleStore&& other) noexcept {
  std::lock_guard lock(other.mu_);
  params_ = other.params_;
  owner_ = other.owner_;
  session_ = other.session_;
  queues_ = std::move(other.queues_);
  generated_ = other.generated_;
  consumed_ = other.consumed_;
}

TripleStore& TripleStore::operator=(TripleStore&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    params_ = other.params_;
    owner_ = other.owner_;
    session_ = other.session_;
    queues_ = std::move(other.queues_);
    generated_ = other.generated_;
    consumed_ = other.consumed_;
  }
  return *this;
}

void TripleStore::push(BeaverTriple triple) {
  std::lock_guard lock(mu_);
  queues_[triple.shape].push_back(std::move(triple));
  ++generated_;
}

BeaverTriple TripleStore::take(const TripleShape& shape) {
  std::lock_guard lock(mu_);
  auto it = queues_.find(shape);
  if (it == queues_.end() || it->second.empty()) {
    fail(ErrorKind::kTripleExhausted,
         "no triple left for shape " + describe(shape));
  }
  BeaverTriple t = std::move(it->second.front());
  it->second.pop_front();
  ++consumed_;
  return t;
}

std::size_t TripleStore::generated() const {
  std::lock_guard lock(mu_);
  return generated_;
}

std::size_t TripleStore::consumed() const {
  std::lock_guard lock(mu_);
  return consumed_;
}

std::size_t TripleStore::available(const TripleShape& shape) const {
  std::lock_guard lock(mu_);
  auto it = queues_.find(shape);
  return it == queues_.end() ? 0 : it->second.size();
}

std::size_t TripleStore::serialized_bytes() const {
  std::lock_guard lock(mu_);
  std::size_t total = 0;
  for (const auto& [shape, q] : queues_) {
    if (q.empty()) continue;
    total += 4 + 2 + 1 + 1 + 4 + 4 * shape.dims().size() + 8;
    total += q.size() * shape.words() * static_cast<std::size_t>(params_.word_bytes());
  }
  return total;
}

void TripleStore::save(const std::filesystem::path& path) const {
  std::lock_guard lock(mu_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  const int width = params_.word_bytes();
  for (const auto& [shape, q] : queues_) {
    if (q.empty()) continue;
    ByteWriter w;
    w.bytes({reinterpret_cast<const std::uint8_t*>(kTripleMagic), 4});
    w.u16(kTripleFileVersion);
    w.u8(static_cast<std::uint8_t>(params_.k));
    w.u8(static_cast<std::uint8_t>(params_.f));
    const Shape dims = shape.dims();
    w.u32(static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) w.u32(d);
    w.u64(q.size());
    for (const auto& t : q) {
      for (Word x : t.u.value.data) w.word(x, width);
      for (Word x : t.v.value.data) w.word(x, width);
      for (Word x : t.q.value.data) w.word(x, width);
    }
    out.write(reinterpret_cast<const char*>(w.buffer().data()),
              static_cast<std::streamsize>(w.size()));
  }
  require(static_cast<bool>(out), ErrorKind::kIo, "short write to " + path.string());
}

TripleStore TripleStore::load(const std::filesystem::path& path, Party owner,
                              SessionId session) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::kIo, "cannot read " + path.string());
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), {}};
  ByteReader r(bytes);
  TripleStore store;
  store.owner_ = owner;
  store.session_ = session;
  bool first = true;
  while (!r.done()) {
    auto magic = r.bytes(4);
    require(std::equal(magic.begin(), magic.end(), kTripleMagic), ErrorKind::kDecode,
            "bad triple file magic in " + path.string());
    require(r.u16() == kTripleFileVersion, ErrorKind::kVersionMismatch,
            "unsupported triple file version");
    RingParams params{r.u8(), r.u8()};
    params.validate();
    if (first) {
      store.params_ = params;
      first = false;
    }
    require(params == store.params_, ErrorKind::kParamsMismatch,
            "triple file mixes ring parameters");
    const auto rank = r.u32();
    Shape dims(rank);
    for (auto& d : dims) d = r.u32();
    const TripleShape shape = TripleShape::from_dims(dims);
    const auto count = r.u64();
    const int width = params.word_bytes();
    for (std::uint64_t c = 0; c < count; ++c) {
      BeaverTriple t{shape,
                     {RingTensor::zeros(params, shape.u_shape()), owner, session},
                     {RingTensor::zeros(params, shape.v_shape()), owner, session},
                     {RingTensor::zeros(params, shape.q_shape()), owner, session}};
      for (auto& x : t.u.value.data) x = r.word(width);
      for (auto& x : t.v.value.data) x = r.word(width);
      for (auto& x : t.q.value.data) x = r.word(width);
      store.queues_[shape].push_back(std::move(t));
      ++store.generated_;
    }
  }
  return store;
}

std::vector<Word> ring_matmul(const std::vector<Word>& a,
                              const std::vector<Word>& b, std::size_t m,
                              std::size_t n, std::size_t p,
                              const RingParams& params) {
  require(a.size() == m * n && b.size() == n * p, ErrorKind::kShapeMismatch,
          "matmul operand sizes do not match");
  std::vector<Word> c(m * p, 0);
  for (std::size_t i = 0; i < m; ++i) {
    Word* row = c.data() + i * p;
    for (std::size_t j = 0; j < n; ++j) {
      const Word aij = a[i * n + j];
      if (aij == 0) continue;
      const Word* brow = b.data() + j * p;
      for (std::size_t l = 0; l < p; ++l) row[l] += aij * brow[l];
    }
  }
  for (auto& x : c) x &= params.mask();
  return c;
}

std::pair<TripleStore, TripleStore> deal_triples(
    const std::vector<TripleShape>& shapes, std::size_t count,
    const RingParams& params, Rng& rng, SessionId session, DealOptions options) {
  require(count >= 1, ErrorKind::kUsage, "triple count must be at least 1");
  params.validate();
  TripleStore s1(params, Party::kS1, session);
  TripleStore s2(params, Party::kS2, session);
  for (const auto& shape : shapes) {
    for (std::size_t c = 0; c < count; ++c) {
      RingTensor u = RingTensor::zeros(params, shape.u_shape());
      RingTensor v = RingTensor::zeros(params, shape.v_shape());
      if (!options.force_zero_u) {
        for (auto& x : u.data) x = rng.next_word(params);
      }
      for (auto& x : v.data) x = rng.next_word(params);
      RingTensor q = RingTensor::zeros(params, shape.q_shape());
      if (shape.kind == TripleShape::Kind::kElementwise) {
        for (std::size_t i = 0; i < q.size(); ++i) {
          q.data[i] = ring::mul(u.data[i], v.data[i], params);
        }
      } else {
        q.data = ring_matmul(u.data, v.data, shape.m, shape.n, shape.p, params);
      }
      auto [u1, u2] = sharing::share(u, rng, session);
      auto [v1, v2] = sharing::share(v, rng, session);
      auto [q1, q2] = sharing::share(q, rng, session);
      s1.push({shape, std::move(u1), std::move(v1), std::move(q1)});
      s2.push({shape, std::move(u2), std::move(v2), std::move(q2)});
    }
  }
  return {std::move(s1), std::move(s2)};
}

}  // namespace privedge
