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

// Gate-insertion pass.
//
// Every node gets a "BL entry-gate" in front of its first instruction.
// Direct, conditional and call terminators get another "BL entry-gate" right
// before the branch; the gate logs the caller's return address, which then
// names the terminator. Indirect jumps, indirect calls and returns get
// "PUSH Rt; BL dest-gate"; the dest gate pops and logs the destination.
// Direct branch immediates and code-address MOV immediates are retargeted to
// the landing slot of their original destination, so the entry gate of the
// target node still runs.

#pragma once

#include <vector>

#include "iscflat/cfg/cfg.hpp"
#include "iscflat/vm/program.hpp"

namespace iscflat::cfg {

struct GateLayout {
  Word entry = vm::mem::kGateEntry;
  Word dest = vm::mem::kGateDest;
};

// Maps between original and instrumented address spaces.
class AddressMap {
 public:
  AddressMap() = default;
  AddressMap(Word orig_base, Word instr_base, std::vector<Word> relocated,
             std::vector<Word> landing, Word instr_end);

  bool empty() const { return relocated_.empty(); }
  bool is_original(Word addr) const;
  bool in_instrumented(Word addr) const {
    return addr >= instr_base_ && addr < instr_end_;
  }

  // Relocated address of original instruction `original`. Throws
  // UnknownAddress when `original` is not an original instruction address.
  Word map_address(Word original) const;
  // First instruction executed when control transfers to `original`: the
  // earliest instruction inserted in front of it, else map_address().
  Word map_target(Word original) const;
  // Original instruction at or after instrumented address `addr`. Addresses
  // outside the instrumented image are returned unchanged.
  Word to_original(Word addr) const;

  std::size_t size() const { return relocated_.size(); }
  Word orig_base() const { return orig_base_; }

 private:
  Word orig_base_ = 0;
  Word instr_base_ = 0;
  Word instr_end_ = 0;
  std::vector<Word> relocated_;
  std::vector<Word> landing_;
};

struct InstrumentedProgram {
  vm::Program program;
  AddressMap addr_map;
  GateLayout gates;
  std::size_t inserted = 0;  // number of inserted instructions
};

// Throws RelocationError if a target cannot be remapped and MalformedProgram
// if the result does not fit the code region.
InstrumentedProgram instrument(const vm::Program& program,
                               const ControlFlowGraph& cfg,
                               GateLayout gates = {});

// Deletes every inserted instruction and undoes relocation.
vm::Program strip(const InstrumentedProgram& ip);

}  // namespace iscflat::cfg
