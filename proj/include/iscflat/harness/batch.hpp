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

// Seeded batch kernels behind the property checks and the benchmarks. Each
// item depends only on its seed, so the OpenMP path and the serial reference
// return identical vectors.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iscflat/harness/generator.hpp"
#include "iscflat/harness/overhead.hpp"
#include "iscflat/harness/scenario.hpp"

namespace iscflat::harness {

enum class Exec : std::uint8_t { Serial, Parallel };

template <typename F>
auto map_indices(std::size_t n, F&& f, Exec exec)
    -> std::vector<decltype(f(std::size_t{}))> {
  std::vector<decltype(f(std::size_t{}))> out(n);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  }
  return out;
}

// A generated App plus two well-behaved handlers (irq 3 at the default
// priority, irq 5 able to preempt it).
struct GeneratedCase {
  std::uint64_t seed = 0;
  vm::Program original;
  cfg::ControlFlowGraph cfg;
  cfg::InstrumentedProgram instrumented;
  vm::Program isrs;
  int isr_len = 0;
};

GeneratedCase generate_case(std::uint64_t seed, const GenOptions& opt = {},
                            int isr_len = -1);

// Attests `c` on a fresh device, with the given schedule (relative to App
// start), and verifies the report.
struct CaseRun {
  AttestOutcome outcome;
  std::optional<verify::Verdict> verdict;
  std::size_t interrupts_taken = 0;
};

CaseRun run_case(const GeneratedCase& c,
                 const std::vector<std::pair<std::uint64_t, int>>& schedule,
                 secure::RuntimeMode mode, bool record_trace,
                 std::uint64_t max_steps = 1'000'000);

struct EquivalenceItem {
  std::uint64_t seed = 0;
  std::vector<vm::Word> plain_log;
  std::vector<vm::Word> irq_log;
  bool plain_accepted = false;
  bool irq_accepted = false;
  std::size_t interrupts_taken = 0;
  std::string error;

  bool holds() const {
    return error.empty() && plain_accepted && irq_accepted && plain_log == irq_log;
  }
  friend bool operator==(const EquivalenceItem&, const EquivalenceItem&) = default;
};

// One (App, handlers, schedule) triple: the log with interrupts must equal
// the log without.
EquivalenceItem benign_equivalence(std::uint64_t seed);

struct OverheadItem {
  std::uint64_t seed = 0;
  int isr_len = 0;
  OverheadSamples samples;
  std::uint64_t baseline_retired = 0;  // original image, same schedule
  std::string error;
};

OverheadItem overhead_case(std::uint64_t seed, int isr_len);

struct TamperItem {
  std::size_t bit = 0;
  bool decoded = false;
  verify::Outcome outcome = verify::Outcome::Accept;  // valid when decoded
  std::string decode_error;

  bool rejected() const { return !decoded || outcome != verify::Outcome::Accept; }
};

// Flips bit `bit` of `wire` and runs the result through the decoder and the
// verifier, with `chl` freshly issued.
TamperItem verify_flipped(const secure::Bytes& wire, std::size_t bit,
                          const secure::Challenge& chl,
                          const secure::Digest& expected_h_app,
                          const cfg::ControlFlowGraph& g,
                          const secure::PublicKey& pk);

}  // namespace iscflat::harness
