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

// Randomness source shared by every component that needs it. A seeded Rng
// is a deterministic mt19937_64 stream; an unseeded one draws bytes from the
// OS CSPRNG (through OpenSSL) so nonces stay unpredictable.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>

namespace iscflat {

class Rng {
 public:
  explicit Rng(std::optional<std::uint64_t> seed = std::nullopt);

  bool seeded() const { return seeded_; }
  void fill(std::span<std::uint8_t> out);
  std::uint64_t next_u64();
  // Uniform in [0, n); n must be non-zero.
  std::uint64_t below(std::uint64_t n);
  std::mt19937_64& engine() { return engine_; }

 private:
  bool seeded_;
  std::mt19937_64 engine_;
};

}  // namespace iscflat
