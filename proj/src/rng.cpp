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

#include "privedge/rng.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>

#include "privedge/error.hpp"

namespace privedge {

std::uint64_t Rng::next_u64() {
  std::uint64_t v = 0;
  fill({reinterpret_cast<std::uint8_t*>(&v), sizeof(v)});
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling over the largest multiple of bound.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

double Rng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

void SecureRng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) {
      if (RAND_bytes(buf_.data(), static_cast<int>(buf_.size())) != 1) {
        fail(ErrorKind::kRandomness, "RAND_bytes failed");
      }
      pos_ = 0;
    }
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint8_t key[16];
  std::memcpy(key, &seed, 8);
  std::memcpy(key + 8, &stream, 8);
  std::uint8_t iv[16] = {};
  auto* ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr ||
      EVP_EncryptInit_ex(ctx, EVP_aes_128_ctr(), nullptr, key, iv) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    fail(ErrorKind::kRandomness, "cannot initialise seeded generator");
  }
  ctx_ = ctx;
}

SeededRng::~SeededRng() {
  EVP_CIPHER_CTX_free(static_cast<EVP_CIPHER_CTX*>(ctx_));
}

void SeededRng::refill() {
  static const std::array<std::uint8_t, 4096> zeros{};
  int len = 0;
  if (EVP_EncryptUpdate(static_cast<EVP_CIPHER_CTX*>(ctx_), buf_.data(), &len,
                        zeros.data(), static_cast<int>(zeros.size())) != 1) {
    fail(ErrorKind::kRandomness, "keystream generation failed");
  }
  pos_ = 0;
}

void SeededRng::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

std::unique_ptr<Rng> make_rng(std::optional<std::uint64_t> seed,
                              std::uint64_t stream) {
  if (seed) return std::make_unique<SeededRng>(*seed, stream);
  return std::make_unique<SecureRng>();
}

}  // namespace privedge
