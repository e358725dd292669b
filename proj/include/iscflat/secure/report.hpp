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

// Attestation report and the byte layout its signature covers:
//
//   blake2s(cflog as LE u32s) || h_app || chl || out
//
// `out` is empty when the device binds no result.

#pragma once

#include <vector>

#include "iscflat/secure/crypto.hpp"
#include "iscflat/vm/isa.hpp"

namespace iscflat::secure {

struct Report {
  Bytes sigma;
  std::vector<vm::Word> cflog;
  Digest h_app{};
  Challenge chl{};
  Bytes out;

  friend bool operator==(const Report&, const Report&) = default;
};

Bytes cflog_bytes(const std::vector<vm::Word>& cflog);
Bytes signed_message(const std::vector<vm::Word>& cflog, const Digest& h_app,
                     const Challenge& chl, const Bytes& out);
inline Bytes signed_message(const Report& r) {
  return signed_message(r.cflog, r.h_app, r.chl, r.out);
}

}  // namespace iscflat::secure
