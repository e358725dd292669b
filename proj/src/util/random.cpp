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

#include "iscflat/util/random.hpp"

#include <openssl/rand.h>

#include <stdexcept>

namespace iscflat {

namespace {

std::uint64_t os_seed() {
  std::uint64_t v = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&v), sizeof v) != 1) {
    throw std::runtime_error("RAND_bytes failed");
  }
  return v;
}

}  // namespace

Rng::Rng(std::optional<std::uint64_t> seed)
    : seeded_(seed.has_value()), engine_(seed ? *seed : os_seed()) {}

void Rng::fill(std::span<std::uint8_t> out) {
  if (!seeded_) {
    if (!out.empty() &&
        RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
      throw std::runtime_error("RAND_bytes failed");
    }
    return;
  }
  for (std::size_t i = 0; i < out.size(); i += 8) {
    const std::uint64_t v = engine_();
    for (std::size_t k = 0; k < 8 && i + k < out.size(); ++k) {
      out[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
    }
  }
}

std::uint64_t Rng::next_u64() { return engine_(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace iscflat
