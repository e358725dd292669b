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

// Seeded random Apps and well-behaved interrupt handlers.
//
// Generated Apps always terminate: branches only go forward, loops are
// counted, and the call graph is acyclic (a function only calls functions
// with a higher index). Some calls go through function pointers so the
// CFG has address-taken targets. Handlers touch only R0-R3 (restored by the
// exception frame), the stack, and ISR scratch memory.

#pragma once

#include <string>

#include "iscflat/util/random.hpp"

namespace iscflat::harness {

struct GenOptions {
  int min_blocks = 3;
  int max_blocks = 8;
  int max_functions = 4;
  int max_isr_len = 12;
};

struct GeneratedApp {
  std::string source;
  int blocks = 0;
  int functions = 0;
};

GeneratedApp generate_app(Rng& rng, const GenOptions& opt = {});

// Handler for `irq` with exactly `body_len` instructions between the
// prologue and the final RET. `label` must be unique across handlers.
std::string generate_isr(Rng& rng, int irq, int body_len,
                         const std::string& label);

}  // namespace iscflat::harness
