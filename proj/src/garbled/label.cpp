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

#include "privedge/garbled/label.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <vector>

#include "privedge/error.hpp"

namespace privedge::gc {
namespace {

// Any fixed public value works; these are the first 16 bytes of pi.
constexpr std::uint8_t kFixedKey[16] = {0x24, 0x3f, 0x6a, 0x88, 0x85, 0xa3, 0x08, 0xd3,
                                        0x13, 0x19, 0x8a, 0x2e, 0x03, 0x70, 0x73, 0x44};

EVP_CIPHER_CTX* as_ctx(void* p) { return static_cast<EVP_CIPHER_CTX*>(p); }

}  // namespace

Label random_label(Rng& rng) {
  Label l;
  l.lo = rng.next_u64();
  l.hi = rng.next_u64();
  return l;
}

FixedKeyHash::FixedKeyHash() {
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (ctx == nullptr ||
      EVP_EncryptInit_ex(ctx, EVP_aes_128_ecb(), nullptr, kFixedKey, nullptr) != 1) {
    EVP_CIPHER_CTX_free(ctx);
    fail(ErrorKind::kRandomness, "cannot initialise fixed-key AES");
  }
  EVP_CIPHER_CTX_set_padding(ctx, 0);
  ctx_ = ctx;
}

FixedKeyHash::~FixedKeyHash() { EVP_CIPHER_CTX_free(as_ctx(ctx_)); }

void FixedKeyHash::hash(std::span<const Label> in, std::span<Label> out) {
  require(in.size() == out.size(), ErrorKind::kUsage, "hash size mismatch");
  if (in.empty()) return;
  // Process in bounded chunks so the aliasing copy stays small.
  constexpr std::size_t kChunk = 1024;
  Label buf[kChunk];
  for (std::size_t off = 0; off < in.size(); off += kChunk) {
    const std::size_t n = std::min(kChunk, in.size() - off);
    int len = 0;
    if (EVP_EncryptUpdate(as_ctx(ctx_), reinterpret_cast<unsigned char*>(buf), &len,
                          reinterpret_cast<const unsigned char*>(in.data() + off),
                          static_cast<int>(n * sizeof(Label))) != 1) {
      fail(ErrorKind::kRandomness, "fixed-key AES failed");
    }
    for (std::size_t i = 0; i < n; ++i) out[off + i] = buf[i] ^ in[off + i];
  }
}

Label FixedKeyHash::hash(const Label& in) {
  Label out;
  hash(std::span<const Label>(&in, 1), std::span<Label>(&out, 1));
  return out;
}

}  // namespace privedge::gc
