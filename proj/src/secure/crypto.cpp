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

#include "iscflat/secure/crypto.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>

#include "iscflat/util/errors.hpp"
#include "iscflat/util/hex.hpp"

namespace iscflat::secure {

namespace {

constexpr std::string_view kSecretHeader = "iscflat-ed25519-secret v1";
constexpr std::string_view kPublicHeader = "iscflat-ed25519-public v1";

struct PkeyFree {
  void operator()(EVP_PKEY* k) const { EVP_PKEY_free(k); }
};
struct MdCtxFree {
  void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyFree>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxFree>;

PkeyPtr private_key(const std::array<std::uint8_t, 32>& seed) {
  PkeyPtr k(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                         seed.data(), seed.size()));
  if (!k) throw MalformedKey("cannot build Ed25519 private key");
  return k;
}

std::vector<std::uint8_t> read_key_file(const std::filesystem::path& path,
                                        std::string_view header) {
  std::ifstream in(path);
  if (!in) throw MalformedKey("cannot open key file " + path.string());
  std::string first;
  std::string second;
  std::getline(in, first);
  std::getline(in, second);
  if (first != header) {
    throw MalformedKey(path.string() + ": expected header '" +
                       std::string(header) + "'");
  }
  const auto bytes = from_hex(second);
  if (!bytes || bytes->size() != 32) {
    throw MalformedKey(path.string() + ": expected 32 hex-encoded bytes");
  }
  return *bytes;
}

void write_key_file(const std::filesystem::path& path, std::string_view header,
                    std::span<const std::uint8_t> bytes) {
  std::ofstream out(path);
  out << header << '\n' << to_hex(bytes) << '\n';
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

Digest blake2s(std::span<const std::uint8_t> data) {
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), d.data(), &len, EVP_blake2s256(),
                 nullptr) != 1 ||
      len != d.size()) {
    throw std::runtime_error("BLAKE2s digest failed");
  }
  return d;
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
  KeyPair kp;
  kp.seed_ = seed;
  const PkeyPtr k = private_key(seed);
  std::size_t len = kp.pk_.size();
  if (EVP_PKEY_get_raw_public_key(k.get(), kp.pk_.data(), &len) != 1 ||
      len != kp.pk_.size()) {
    throw MalformedKey("cannot derive Ed25519 public key");
  }
  return kp;
}

KeyPair KeyPair::generate(Rng& rng) {
  std::array<std::uint8_t, 32> seed{};
  rng.fill(seed);
  return from_seed(seed);
}

Bytes KeyPair::sign(std::span<const std::uint8_t> message) const {
  const PkeyPtr k = private_key(seed_);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  Bytes sig(kSignatureBytes);
  std::size_t len = sig.size();
  if (!ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, k.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(),
                     message.size()) != 1 ||
      len != kSignatureBytes) {
    throw std::runtime_error("Ed25519 signing failed");
  }
  return sig;
}

bool verify(std::span<const std::uint8_t> pk,
            std::span<const std::uint8_t> message,
            std::span<const std::uint8_t> sigma) {
  if (pk.size() != 32) throw MalformedKey("Ed25519 public key must be 32 bytes");
  PkeyPtr k(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pk.data(),
                                        pk.size()));
  if (!k) throw MalformedKey("cannot load Ed25519 public key");
  if (sigma.size() != kSignatureBytes) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, k.get()) !=
          1) {
    throw std::runtime_error("Ed25519 verify setup failed");
  }
  return EVP_DigestVerify(ctx.get(), sigma.data(), sigma.size(),
                          message.data(), message.size()) == 1;
}

void save_secret_key(const KeyPair& kp, const std::filesystem::path& path) {
  write_key_file(path, kSecretHeader, kp.seed_);
}

KeyPair load_secret_key(const std::filesystem::path& path) {
  const auto bytes = read_key_file(path, kSecretHeader);
  std::array<std::uint8_t, 32> seed{};
  std::copy(bytes.begin(), bytes.end(), seed.begin());
  return KeyPair::from_seed(seed);
}

void save_public_key(const PublicKey& pk, const std::filesystem::path& path) {
  write_key_file(path, kPublicHeader, pk);
}

PublicKey load_public_key(const std::filesystem::path& path) {
  const auto bytes = read_key_file(path, kPublicHeader);
  PublicKey pk{};
  std::copy(bytes.begin(), bytes.end(), pk.begin());
  return pk;
}

}  // namespace iscflat::secure
