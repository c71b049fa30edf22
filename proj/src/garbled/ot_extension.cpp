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

#include <openssl/evp.h>

#include <cstring>

#include "privedge/error.hpp"
#include "privedge/garbled/ot.hpp"

namespace privedge::gc {
namespace {

constexpr std::size_t kKappa = 128;
constexpr std::uint8_t kColumns = 4;
constexpr std::uint8_t kPayload = 5;
constexpr std::uint32_t kMaxBatch = 1u << 24;

// AES-128-CTR keystream under a base-OT seed; successive calls continue the
// stream so both ends stay aligned across batches.
class Prg {
 public:
  explicit Prg(const Label& seed) {
    ctx_ = EVP_CIPHER_CTX_new();
    std::uint8_t key[16];
    std::memcpy(key, &seed, 16);
    const std::uint8_t iv[16] = {};
    if (ctx_ == nullptr ||
        EVP_EncryptInit_ex(ctx_, EVP_aes_128_ctr(), nullptr, key, iv) != 1) {
      EVP_CIPHER_CTX_free(ctx_);
      fail(ErrorKind::kRandomness, "cannot initialise OT extension PRG");
    }
  }
  ~Prg() { EVP_CIPHER_CTX_free(ctx_); }
  Prg(const Prg&) = delete;
  Prg& operator=(const Prg&) = delete;

  void next(std::uint8_t* out, std::size_t n) {
    std::memset(out, 0, n);
    int len = 0;
    if (EVP_EncryptUpdate(ctx_, out, &len, out, static_cast<int>(n)) != 1) {
      fail(ErrorKind::kRandomness, "OT extension PRG failed");
    }
  }

 private:
  EVP_CIPHER_CTX* ctx_ = nullptr;
};

bool bit_at(const std::uint8_t* bytes, std::size_t j) {
  return ((bytes[j >> 3] >> (j & 7)) & 1) != 0;
}

// Column-major kappa x m bit matrix (column i = cols[i*nb ...]) to m rows of
// 128 bits each.
std::vector<Label> transpose(const std::vector<std::uint8_t>& cols, std::size_t m) {
  const std::size_t nb = (m + 7) / 8;
  std::vector<Label> rows(nb * 8);
  for (std::size_t i = 0; i < kKappa; ++i) {
    const std::uint8_t* col = cols.data() + i * nb;
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    for (std::size_t byte = 0; byte < nb; ++byte) {
      std::uint8_t v = col[byte];
      while (v != 0) {
        const int t = __builtin_ctz(v);
        Label& row = rows[byte * 8 + static_cast<std::size_t>(t)];
        (i < 64 ? row.lo : row.hi) |= bit;
        v &= static_cast<std::uint8_t>(v - 1);
      }
    }
  }
  rows.resize(m);
  return rows;
}

Label ext_key(const Label& row, std::uint64_t index) {
  Label k = gf_double(row);
  k.lo ^= index;
  k.hi ^= std::uint64_t{1} << 62;
  return k;
}

}  // namespace

struct ExtOtSender::State {
  Label s;
  std::vector<std::unique_ptr<Prg>> prg;  // seeded by k_i^{s_i}
  std::uint64_t counter = 0;
  FixedKeyHash hash;
};

struct ExtOtReceiver::State {
  std::vector<std::unique_ptr<Prg>> prg0;
  std::vector<std::unique_ptr<Prg>> prg1;
  std::uint64_t counter = 0;
  FixedKeyHash hash;
};

ExtOtSender::ExtOtSender(int base_modulus_bits, Rng& rng)
    : bits_(base_modulus_bits), rng_(rng) {}
ExtOtSender::~ExtOtSender() = default;

void ExtOtSender::send(net::Channel& ch, std::span<const LabelPair> pairs) {
  require(pairs.size() <= kMaxBatch, ErrorKind::kOtProtocol, "OT batch too large");
  if (!st_) {
    auto st = std::make_unique<State>();
    st->s = random_label(rng_);
    std::vector<bool> choices(kKappa);
    for (std::size_t i = 0; i < kKappa; ++i) {
      choices[i] = (((i < 64 ? st->s.lo : st->s.hi) >> (i & 63)) & 1) != 0;
    }
    RsaOtReceiver base(rng_);
    for (const Label& seed : base.receive(ch, choices)) {
      st->prg.push_back(std::make_unique<Prg>(seed));
    }
    st_ = std::move(st);
  }
  const std::size_t m = pairs.size();
  const std::size_t nb = (m + 7) / 8;
  const auto body = ch.recv(net::MessageType::kOtMessage);
  ByteReader r(body);
  require(body.size() == 5 + kKappa * nb && r.u8() == kColumns && r.u32() == m,
          ErrorKind::kOtProtocol, "malformed OT extension columns");
  const auto u = r.bytes(kKappa * nb);

  std::vector<std::uint8_t> q(kKappa * nb);
  for (std::size_t i = 0; i < kKappa; ++i) {
    std::uint8_t* col = q.data() + i * nb;
    st_->prg[i]->next(col, nb);
    const bool si = (((i < 64 ? st_->s.lo : st_->s.hi) >> (i & 63)) & 1) != 0;
    if (si) {
      for (std::size_t b = 0; b < nb; ++b) col[b] ^= u[i * nb + b];
    }
  }
  const std::vector<Label> rows = transpose(q, m);
  std::vector<Label> keys(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    keys[2 * j] = ext_key(rows[j], st_->counter + j);
    keys[2 * j + 1] = ext_key(rows[j] ^ st_->s, st_->counter + j);
  }
  st_->hash.hash(keys, keys);
  st_->counter += m;

  ByteWriter w;
  w.u8(kPayload);
  w.u32(static_cast<std::uint32_t>(m));
  for (std::size_t j = 0; j < m; ++j) {
    write_label(w, pairs[j][0] ^ keys[2 * j]);
    write_label(w, pairs[j][1] ^ keys[2 * j + 1]);
  }
  ch.send(net::MessageType::kOtMessage, w.take());
}

ExtOtReceiver::ExtOtReceiver(int base_modulus_bits, Rng& rng)
    : bits_(base_modulus_bits), rng_(rng) {}
ExtOtReceiver::~ExtOtReceiver() = default;

std::vector<Label> ExtOtReceiver::receive(net::Channel& ch,
                                          const std::vector<bool>& choices) {
  require(choices.size() <= kMaxBatch, ErrorKind::kOtProtocol, "OT batch too large");
  if (!st_) {
    auto st = std::make_unique<State>();
    std::vector<LabelPair> seeds(kKappa);
    for (auto& s : seeds) s = {random_label(rng_), random_label(rng_)};
    RsaOtSender base(bits_, rng_);
    base.send(ch, seeds);
    for (const auto& s : seeds) {
      st->prg0.push_back(std::make_unique<Prg>(s[0]));
      st->prg1.push_back(std::make_unique<Prg>(s[1]));
    }
    st_ = std::move(st);
  }
  const std::size_t m = choices.size();
  const std::size_t nb = (m + 7) / 8;
  std::vector<std::uint8_t> r(nb, 0);
  for (std::size_t j = 0; j < m; ++j) {
    if (choices[j]) r[j >> 3] |= static_cast<std::uint8_t>(1u << (j & 7));
  }

  std::vector<std::uint8_t> t(kKappa * nb);
  std::vector<std::uint8_t> g1(nb);
  ByteWriter w;
  w.u8(kColumns);
  w.u32(static_cast<std::uint32_t>(m));
  for (std::size_t i = 0; i < kKappa; ++i) {
    std::uint8_t* col = t.data() + i * nb;
    st_->prg0[i]->next(col, nb);
    st_->prg1[i]->next(g1.data(), nb);
    for (std::size_t b = 0; b < nb; ++b) g1[b] ^= col[b] ^ r[b];
    w.bytes(g1);
  }
  ch.send(net::MessageType::kOtMessage, w.take());

  const std::vector<Label> rows = transpose(t, m);
  std::vector<Label> keys(m);
  for (std::size_t j = 0; j < m; ++j) keys[j] = ext_key(rows[j], st_->counter + j);
  st_->hash.hash(keys, keys);
  st_->counter += m;

  const auto body = ch.recv(net::MessageType::kOtMessage);
  ByteReader rd(body);
  require(body.size() == 5 + m * 32 && rd.u8() == kPayload && rd.u32() == m,
          ErrorKind::kOtProtocol, "malformed OT extension payload");
  std::vector<Label> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const Label y0 = read_label(rd);
    const Label y1 = read_label(rd);
    out[j] = (bit_at(r.data(), j) ? y1 : y0) ^ keys[j];
  }
  return out;
}

}  // namespace privedge::gc
