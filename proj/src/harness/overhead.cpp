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

#include "iscflat/harness/overhead.hpp"

#include <algorithm>

namespace iscflat::harness {

namespace {

namespace mem = vm::mem;

bool in_nsc(vm::Word pc) { return pc >= mem::kNscBase && pc < mem::kNscBase + mem::kNscSize; }

bool in_handler_code(vm::Word pc) {
  return pc >= mem::kOtherCodeBase && pc < mem::kOtherCodeBase + mem::kOtherCodeSize;
}

// Per exception level bookkeeping.
struct Level {
  std::uint64_t gate = 0;        // instructions of the gate call in progress
  bool in_entry = true;          // handler has not started yet
  std::uint64_t entry = 0;
  std::uint64_t since_handler = 0;
};

}  // namespace

void OverheadSamples::append(const OverheadSamples& o) {
  const auto cat = [](std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
    a.insert(a.end(), b.begin(), b.end());
  };
  cat(entry_gate, o.entry_gate);
  cat(dest_gate, o.dest_gate);
  cat(dispatcher_entry, o.dispatcher_entry);
  cat(dispatcher_exit, o.dispatcher_exit);
  app_retired += o.app_retired;
  handler_retired += o.handler_retired;
  total_retired += o.total_retired;
}

OverheadSamples measure_overhead(const vm::Trace& trace,
                                 const vm::Program& deployed,
                                 const cfg::AddressMap& map) {
  OverheadSamples out;
  // Level 0 is thread context; it has no dispatcher cost.
  std::vector<Level> levels(1);
  levels[0].in_entry = false;

  const auto inserted = [&](vm::Word pc) {
    if (map.empty() || !deployed.contains(pc)) return false;
    const vm::Word orig = map.to_original(pc);
    return !(map.is_original(orig) && map.map_address(orig) == pc);
  };

  for (const vm::TraceRecord& t : trace) {
    Level& top = levels.back();
    switch (t.event) {
      case vm::TraceEvent::IrqEntry:
        levels.emplace_back();
        continue;
      case vm::TraceEvent::ExcReturn:
        if (levels.size() > 1) {
          out.dispatcher_entry.push_back(top.entry);
          out.dispatcher_exit.push_back(top.since_handler);
          levels.pop_back();
        }
        continue;
      case vm::TraceEvent::Retire:
        break;
      default:
        continue;
    }
    ++out.total_retired;
    if (deployed.contains(t.pc)) ++out.app_retired;
    if (in_handler_code(t.pc)) {
      ++out.handler_retired;
      top.in_entry = false;
      top.since_handler = 0;
      continue;
    }
    if (top.in_entry) {
      ++top.entry;
      continue;
    }
    ++top.since_handler;
    if (inserted(t.pc)) {
      ++top.gate;
    } else if (in_nsc(t.pc) && top.gate > 0) {
      ++top.gate;
      const auto op = vm::decode(t.insn);
      if (op && op->op == vm::Opcode::NscCall) {
        (t.pc == mem::kGateDest ? out.dest_gate : out.entry_gate).push_back(top.gate);
        top.gate = 0;
      }
    } else {
      top.gate = 0;
    }
  }
  return out;
}

Stat summarize(const std::vector<std::uint64_t>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double sum = 0;
  for (auto x : xs) sum += static_cast<double>(x);
  s.mean = sum / static_cast<double>(s.n);
  double sq = 0;
  for (auto x : xs) sq += (static_cast<double>(x) - s.mean) * (static_cast<double>(x) - s.mean);
  s.variance = sq / static_cast<double>(s.n);
  return s;
}

}  // namespace iscflat::harness
