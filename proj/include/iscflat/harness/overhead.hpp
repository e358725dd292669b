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

// Instruction-count overhead read off an execution trace.
//
// A gate call is the run of inserted App instructions plus NSC veneer
// instructions that ends in the veneer's NSC_CALL. Dispatcher entry cost is
// what retires between exception entry and the handler's first instruction;
// exit cost is what retires between the handler's last instruction and the
// exception return. Work done by nested handlers is not charged to the gate
// or dispatcher they interrupted.

#pragma once

#include <cstdint>
#include <vector>

#include "iscflat/cfg/instrument.hpp"
#include "iscflat/vm/machine.hpp"

namespace iscflat::harness {

struct OverheadSamples {
  std::vector<std::uint64_t> entry_gate;  // per entry-gate call
  std::vector<std::uint64_t> dest_gate;   // per destination-gate call
  std::vector<std::uint64_t> dispatcher_entry;
  std::vector<std::uint64_t> dispatcher_exit;
  std::uint64_t app_retired = 0;       // App-region instructions, gates included
  std::uint64_t handler_retired = 0;   // instructions retired in handler code
  std::uint64_t total_retired = 0;

  void append(const OverheadSamples& o);
};

OverheadSamples measure_overhead(const vm::Trace& trace,
                                 const vm::Program& deployed,
                                 const cfg::AddressMap& map);

struct Stat {
  std::size_t n = 0;
  double mean = 0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  double variance = 0;
};

Stat summarize(const std::vector<std::uint64_t>& xs);

}  // namespace iscflat::harness
