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

#include <gmpxx.h>

#include "privedge/error.hpp"
#include "privedge/garbled/ot.hpp"

namespace privedge::gc {

namespace {

constexpr std::uint8_t kOffer = 1;
constexpr std::uint8_t kBlind = 2;
constexpr std::uint8_t kMasked = 3;
constexpr std::uint32_t kPublicExponent = 65537;
constexpr std::uint32_t kMaxBatch = 1u << 24;

mpz_class from_le(std::span<const std::uint8_t> b) {
  mpz_class z;
  mpz_import(z.get_mpz_t(), b.size(), -1, 1, 0, 0, b.data());
  return z;
}

void write_le(ByteWriter& w, const mpz_class& z, std::size_t nbytes) {
  std::vector<std::uint8_t> buf(nbytes, 0);
  require(mpz_sizeinbase(z.get_mpz_t(), 256) <= nbytes, ErrorKind::kOtProtocol,
          "integer does not fit the modulus width");
  std::size_t count = 0;
  mpz_export(buf.data(), &count, -1, 1, 0, 0, z.get_mpz_t());
  w.bytes(buf);
}

mpz_class label_to_mpz(const Label& l) {
  ByteWriter w;
  write_label(w, l);
  return from_le(w.buffer());
}

Label mpz_to_label(const mpz_class& z) {
  require(mpz_sizeinbase(z.get_mpz_t(), 2) <= 128, ErrorKind::kOtProtocol,
          "transferred value exceeds 128 bits");
  ByteWriter w;
  write_le(w, z, 16);
  ByteReader r(w.buffer());
  return read_label(r);
}

mpz_class random_bytes_mpz(std::size_t nbytes, Rng& rng) {
  std::vector<std::uint8_t> buf(nbytes);
  rng.fill(buf);
  return from_le(buf);
}

// Uniform in [0, n) up to a 2^-64 statistical distance.
mpz_class random_below(const mpz_class& n, Rng& rng) {
  const std::size_t nbytes = mpz_sizeinbase(n.get_mpz_t(), 256) + 8;
  mpz_class z = random_bytes_mpz(nbytes, rng);
  mpz_mod(z.get_mpz_t(), z.get_mpz_t(), n.get_mpz_t());
  return z;
}

mpz_class random_prime(int bits, Rng& rng) {
  for (;;) {
    mpz_class p = random_bytes_mpz(static_cast<std::size_t>(bits) / 8, rng);
    mpz_setbit(p.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 1));
    mpz_setbit(p.get_mpz_t(), static_cast<mp_bitcnt_t>(bits - 2));
    mpz_setbit(p.get_mpz_t(), 0);
    mpz_nextprime(p.get_mpz_t(), p.get_mpz_t());
    if (mpz_sizeinbase(p.get_mpz_t(), 2) == static_cast<std::size_t>(bits)) return p;
  }
}

void check_bits(int bits) {
  require(bits >= 512 && bits <= 8192 && bits % 16 == 0, ErrorKind::kOtProtocol,
          "unsupported RSA modulus size " + std::to_string(bits));
}

}  // namespace

struct OtKeyPair::Impl {
  int bits = 0;
  mpz_class n, e, d, p, q, dp, dq, qinv;

  // c^d mod n through the CRT.
  mpz_class decrypt(const mpz_class& c) const {
    mpz_class m1, m2, h;
    mpz_powm(m1.get_mpz_t(), c.get_mpz_t(), dp.get_mpz_t(), p.get_mpz_t());
    mpz_powm(m2.get_mpz_t(), c.get_mpz_t(), dq.get_mpz_t(), q.get_mpz_t());
    h = qinv * (m1 - m2);
    mpz_mod(h.get_mpz_t(), h.get_mpz_t(), p.get_mpz_t());
    return m2 + h * q;
  }
};

OtKeyPair::OtKeyPair() : impl_(std::make_unique<Impl>()) {}
OtKeyPair::~OtKeyPair() = default;
OtKeyPair::OtKeyPair(OtKeyPair&&) noexcept = default;
OtKeyPair& OtKeyPair::operator=(OtKeyPair&&) noexcept = default;

OtKeyPair OtKeyPair::generate(int modulus_bits, Rng& rng) {
  check_bits(modulus_bits);
  OtKeyPair kp;
  Impl& k = *kp.impl_;
  k.bits = modulus_bits;
  k.e = kPublicExponent;
  for (;;) {
    k.p = random_prime(modulus_bits / 2, rng);
    k.q = random_prime(modulus_bits / 2, rng);
    if (k.p == k.q) continue;
    const mpz_class phi = (k.p - 1) * (k.q - 1);
    if (mpz_invert(k.d.get_mpz_t(), k.e.get_mpz_t(), phi.get_mpz_t()) == 0) continue;
    break;
  }
  k.n = k.p * k.q;
  k.dp = k.d % (k.p - 1);
  k.dq = k.d % (k.q - 1);
  mpz_invert(k.qinv.get_mpz_t(), k.q.get_mpz_t(), k.p.get_mpz_t());
  return kp;
}

int OtKeyPair::modulus_bits() const { return impl_->bits; }
std::uint32_t OtKeyPair::public_exponent() const {
  return static_cast<std::uint32_t>(impl_->e.get_ui());
}
std::vector<std::uint8_t> OtKeyPair::modulus() const {
  ByteWriter w;
  write_le(w, impl_->n, static_cast<std::size_t>(impl_->bits) / 8);
  return w.take();
}

RsaOtSender::RsaOtSender(int modulus_bits, Rng& rng)
    : rng_(rng), keys_(OtKeyPair::generate(modulus_bits, rng)) {}

void RsaOtSender::send(net::Channel& ch, std::span<const LabelPair> pairs) {
  const auto& k = keys_.impl();
  const std::size_t nb = static_cast<std::size_t>(k.bits) / 8;
  const auto count = static_cast<std::uint32_t>(pairs.size());
  require(pairs.size() <= kMaxBatch, ErrorKind::kOtProtocol, "OT batch too large");

  std::vector<std::array<mpz_class, 2>> x(count);
  ByteWriter offer;
  offer.u8(kOffer);
  offer.u16(static_cast<std::uint16_t>(k.bits));
  offer.u32(keys_.public_exponent());
  write_le(offer, k.n, nb);
  offer.u32(count);
  for (auto& xs : x) {
    do {
      xs[0] = random_below(k.n, rng_);
      xs[1] = random_below(k.n, rng_);
    } while (xs[0] == xs[1]);
    write_le(offer, xs[0], nb);
    write_le(offer, xs[1], nb);
  }
  ch.send(net::MessageType::kOtMessage, offer.take());

  const auto body = ch.recv(net::MessageType::kOtMessage);
  ByteReader r(body);
  require(body.size() == 5 + std::size_t{count} * nb && r.u8() == kBlind &&
              r.u32() == count,
          ErrorKind::kOtProtocol, "malformed OT blind message");
  ByteWriter masked;
  masked.u8(kMasked);
  masked.u32(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const mpz_class v = from_le(r.bytes(nb));
    require(v < k.n, ErrorKind::kOtProtocol, "OT blind value outside Z_N");
    for (int b = 0; b < 2; ++b) {
      mpz_class c = v - x[i][b];
      mpz_mod(c.get_mpz_t(), c.get_mpz_t(), k.n.get_mpz_t());
      mpz_class m = label_to_mpz(pairs[i][b]) + k.decrypt(c);
      mpz_mod(m.get_mpz_t(), m.get_mpz_t(), k.n.get_mpz_t());
      write_le(masked, m, nb);
    }
  }
  ch.send(net::MessageType::kOtMessage, masked.take());
}

std::vector<Label> RsaOtReceiver::receive(net::Channel& ch,
                                          const std::vector<bool>& choices) {
  const auto body = ch.recv(net::MessageType::kOtMessage);
  ByteReader r(body);
  require(body.size() >= 7 && r.u8() == kOffer, ErrorKind::kOtProtocol,
          "malformed OT offer");
  const int bits = r.u16();
  check_bits(bits);
  const std::size_t nb = static_cast<std::size_t>(bits) / 8;
  const mpz_class e = r.u32();
  require(body.size() == 7 + nb + 4 + choices.size() * 2 * nb, ErrorKind::kOtProtocol,
          "OT offer size does not match the expected batch");
  const mpz_class n = from_le(r.bytes(nb));
  require(mpz_sizeinbase(n.get_mpz_t(), 2) == static_cast<std::size_t>(bits) &&
              mpz_odd_p(n.get_mpz_t()) && e > 1,
          ErrorKind::kOtProtocol, "invalid OT public key");
  require(r.u32() == choices.size(), ErrorKind::kOtProtocol, "OT batch size mismatch");

  std::vector<mpz_class> blinds(choices.size());
  ByteWriter blind;
  blind.u8(kBlind);
  blind.u32(static_cast<std::uint32_t>(choices.size()));
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const mpz_class x0 = from_le(r.bytes(nb));
    const mpz_class x1 = from_le(r.bytes(nb));
    require(x0 != x1 && x0 < n && x1 < n, ErrorKind::kOtProtocol,
            "invalid OT random pair");
    blinds[i] = random_below(n, rng_);
    mpz_class v;
    mpz_powm(v.get_mpz_t(), blinds[i].get_mpz_t(), e.get_mpz_t(), n.get_mpz_t());
    v += choices[i] ? x1 : x0;
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    write_le(blind, v, nb);
  }
  ch.send(net::MessageType::kOtMessage, blind.take());

  const auto reply = ch.recv(net::MessageType::kOtMessage);
  ByteReader rr(reply);
  require(reply.size() == 5 + choices.size() * 2 * nb && rr.u8() == kMasked &&
              rr.u32() == choices.size(),
          ErrorKind::kOtProtocol, "malformed OT masked message");
  std::vector<Label> out(choices.size());
  for (std::size_t i = 0; i < choices.size(); ++i) {
    const mpz_class m0 = from_le(rr.bytes(nb));
    const mpz_class m1 = from_le(rr.bytes(nb));
    mpz_class m = (choices[i] ? m1 : m0) - blinds[i];
    mpz_mod(m.get_mpz_t(), m.get_mpz_t(), n.get_mpz_t());
    out[i] = mpz_to_label(m);
  }
  return out;
}

const char* ot_mode_name(OtMode mode) {
  return mode == OtMode::kRsa ? "rsa" : "extension";
}

std::unique_ptr<OtSender> make_ot_sender(const OtConfig& config, Rng& rng) {
  if (config.mode == OtMode::kRsa) {
    return std::make_unique<RsaOtSender>(config.modulus_bits, rng);
  }
  return std::make_unique<ExtOtSender>(config.modulus_bits, rng);
}

std::unique_ptr<OtReceiver> make_ot_receiver(const OtConfig& config, Rng& rng) {
  if (config.mode == OtMode::kRsa) return std::make_unique<RsaOtReceiver>(rng);
  return std::make_unique<ExtOtReceiver>(config.modulus_bits, rng);
}

}  // namespace privedge::gc
