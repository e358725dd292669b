// Copyright 2026 The iscflat-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Cryptographic contracts of the secure world: a 32-byte BLAKE2s digest and
// Ed25519 signatures. Both are provided by OpenSSL's EVP interface.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "iscflat/util/random.hpp"

namespace iscflat::secure {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;
using Challenge = std::array<std::uint8_t, 32>;
using AppId = std::array<std::uint8_t, 16>;
using PublicKey = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kSignatureBytes = 64;

Digest blake2s(std::span<const std::uint8_t> data);
inline Digest blake2s(std::string_view s) {
  return blake2s(std::span(reinterpret_cast<const std::uint8_t*>(s.data()),
                           s.size()));
}

// Signing key. The seed never leaves this object except through
// save_secret_key().
class KeyPair {
 public:
  static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
  static KeyPair generate(Rng& rng);

  const PublicKey& public_key() const { return pk_; }
  Bytes sign(std::span<const std::uint8_t> message) const;

  friend void save_secret_key(const KeyPair& kp,
                              const std::filesystem::path& path);

 private:
  std::array<std::uint8_t, 32> seed_{};
  PublicKey pk_{};
};

// Throws MalformedKey when `pk` is not a usable Ed25519 public key.
bool verify(std::span<const std::uint8_t> pk,
            std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> sigma);

// Key files are one header line plus one hex line. Loading throws
// MalformedKey on any format problem.
void save_secret_key(const KeyPair& kp, const std::filesystem::path& path);
KeyPair load_secret_key(const std::filesystem::path& path);
void save_public_key(const PublicKey& pk, const std::filesystem::path& path);
PublicKey load_public_key(const std::filesystem::path& path);

}  // namespace iscflat::secure
