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
#include <memory>
#include <span>
#include <vector>

#include "privedge/garbled/label.hpp"
#include "privedge/net/channel.hpp"
#include "privedge/rng.hpp"

namespace privedge::gc {

enum class OtMode : std::uint8_t {
  kRsa = 0,        // one RSA-blinding OT per bit
  kExtension = 1,  // IKNP extension over 128 RSA-blinding base OTs
};

struct OtConfig {
  OtMode mode = OtMode::kExtension;
  int modulus_bits = 2048;  // 512 is for tests only
};

const char* ot_mode_name(OtMode mode);

// 1-out-of-2 OT of labels. Every batch travels as kOtMessage frames.
class OtSender {
 public:
  virtual ~OtSender() = default;
  virtual void send(net::Channel& ch, std::span<const LabelPair> pairs) = 0;
};

class OtReceiver {
 public:
  virtual ~OtReceiver() = default;
  virtual std::vector<Label> receive(net::Channel& ch,
                                     const std::vector<bool>& choices) = 0;
};

// RSA key pair of the blinding OT. Generated fresh per sender instance.
class OtKeyPair {
 public:
  static OtKeyPair generate(int modulus_bits, Rng& rng);
  ~OtKeyPair();
  OtKeyPair(OtKeyPair&&) noexcept;
  OtKeyPair& operator=(OtKeyPair&&) noexcept;

  int modulus_bits() const;
  std::uint32_t public_exponent() const;
  // N, little-endian, modulus_bits / 8 bytes.
  std::vector<std::uint8_t> modulus() const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  OtKeyPair();
  std::unique_ptr<Impl> impl_;
};

// Sender: publishes (N, e) and random x_0 != x_1 per bit; receives
// v = x_b + k^e mod N; returns m'_i = m_i + (v - x_i)^d mod N.
// Receiver: recovers m_b = m'_b - k mod N.
class RsaOtSender final : public OtSender {
 public:
  RsaOtSender(int modulus_bits, Rng& rng);
  void send(net::Channel& ch, std::span<const LabelPair> pairs) override;
  const OtKeyPair& keys() const { return keys_; }

 private:
  Rng& rng_;
  OtKeyPair keys_;
};

class RsaOtReceiver final : public OtReceiver {
 public:
  explicit RsaOtReceiver(Rng& rng) : rng_(rng) {}
  std::vector<Label> receive(net::Channel& ch,
                             const std::vector<bool>& choices) override;

 private:
  Rng& rng_;
};

// IKNP extension. Roles of the base OTs are reversed: the extension receiver
// runs the RSA sender and vice versa. Base OTs run lazily on the first batch.
class ExtOtSender final : public OtSender {
 public:
  ExtOtSender(int base_modulus_bits, Rng& rng);
  ~ExtOtSender() override;
  void send(net::Channel& ch, std::span<const LabelPair> pairs) override;

 private:
  struct State;
  int bits_;
  Rng& rng_;
  std::unique_ptr<State> st_;
};

class ExtOtReceiver final : public OtReceiver {
 public:
  ExtOtReceiver(int base_modulus_bits, Rng& rng);
  ~ExtOtReceiver() override;
  std::vector<Label> receive(net::Channel& ch,
                             const std::vector<bool>& choices) override;

 private:
  struct State;
  int bits_;
  Rng& rng_;
  std::unique_ptr<State> st_;
};

std::unique_ptr<OtSender> make_ot_sender(const OtConfig& config, Rng& rng);
std::unique_ptr<OtReceiver> make_ot_receiver(const OtConfig& config, Rng& rng);

}  // namespace privedge::gc
