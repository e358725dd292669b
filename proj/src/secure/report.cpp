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

#include "iscflat/secure/report.hpp"

namespace iscflat::secure {

Bytes cflog_bytes(const std::vector<vm::Word>& cflog) {
  Bytes out;
  out.reserve(cflog.size() * 4);
  for (vm::Word w : cflog) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  }
  return out;
}

Bytes signed_message(const std::vector<vm::Word>& cflog, const Digest& h_app,
                     const Challenge& chl, const Bytes& out) {
  const Digest h_log = blake2s(cflog_bytes(cflog));
  Bytes m;
  m.reserve(96 + out.size());
  m.insert(m.end(), h_log.begin(), h_log.end());
  m.insert(m.end(), h_app.begin(), h_app.end());
  m.insert(m.end(), chl.begin(), chl.end());
  m.insert(m.end(), out.begin(), out.end());
  return m;
}

}  // namespace iscflat::secure
