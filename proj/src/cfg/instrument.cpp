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

#include "iscflat/cfg/instrument.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "iscflat/util/errors.hpp"

namespace iscflat::cfg {

namespace {

using vm::Instruction;
using vm::Opcode;

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

}  // namespace

AddressMap::AddressMap(Word orig_base, Word instr_base,
                       std::vector<Word> relocated, std::vector<Word> landing,
                       Word instr_end)
    : orig_base_(orig_base),
      instr_base_(instr_base),
      instr_end_(instr_end),
      relocated_(std::move(relocated)),
      landing_(std::move(landing)) {}

bool AddressMap::is_original(Word addr) const {
  return addr >= orig_base_ && (addr - orig_base_) % 4 == 0 &&
         (addr - orig_base_) / 4 < relocated_.size();
}

Word AddressMap::map_address(Word original) const {
  if (!is_original(original)) {
    throw UnknownAddress("not an original instruction address: " +
                         hex(original));
  }
  return relocated_[(original - orig_base_) / 4];
}

Word AddressMap::map_target(Word original) const {
  if (!is_original(original)) {
    throw UnknownAddress("not an original instruction address: " +
                         hex(original));
  }
  return landing_[(original - orig_base_) / 4];
}

Word AddressMap::to_original(Word addr) const {
  if (!in_instrumented(addr)) return addr;
  const auto it = std::lower_bound(relocated_.begin(), relocated_.end(), addr);
  if (it == relocated_.end()) return addr;
  return orig_base_ + 4 * static_cast<Word>(it - relocated_.begin());
}

InstrumentedProgram instrument(const vm::Program& program,
                               const ControlFlowGraph& cfg, GateLayout gates) {
  InstrumentedProgram out;
  out.gates = gates;
  out.program.base = program.base;
  out.program.region = program.region;
  out.program.ivt = program.ivt;
  const std::size_t n = program.code.size();
  if (n == 0) {
    out.program = program;
    return out;
  }

  // First pass: lay out the rewritten image and record both maps.
  std::vector<Word> relocated(n);
  std::vector<Word> landing(n);
  std::vector<std::vector<Instruction>> before(n);
  for (const CfgNode& node : cfg.nodes) {
    if (!program.contains(node.start) || !program.contains(node.end)) {
      throw RelocationError("cfg node " + std::to_string(node.id) +
                            " lies outside the program");
    }
    before[(node.start - program.base) / 4].push_back(vm::call(gates.entry));
    const Instruction term = program.instruction_at(node.end);
    auto& pre = before[(node.end - program.base) / 4];
    switch (node.terminator) {
      case Terminator::Direct:
      case Terminator::Conditional:
      case Terminator::DirectCall:
        pre.push_back(vm::call(gates.entry));
        break;
      case Terminator::Indirect:
      case Terminator::IndirectCall:
        pre.push_back(vm::push(term.rd));
        pre.push_back(vm::call(gates.dest));
        break;
      case Terminator::Return:
        pre.push_back(vm::push(vm::kRegLr));
        pre.push_back(vm::call(gates.dest));
        break;
      case Terminator::FallthroughToHalt:
        break;
    }
  }
  Word addr = program.base;
  for (std::size_t i = 0; i < n; ++i) {
    landing[i] = addr;
    addr += 4 * static_cast<Word>(before[i].size());
    relocated[i] = addr;
    addr += 4;
    out.inserted += before[i].size();
  }
  const Word end = addr;
  if (end - program.base > vm::mem::kAppCodeSize || !vm::fits_imm(end)) {
    throw MalformedProgram("instrumented program does not fit the code region");
  }
  out.addr_map = AddressMap(program.base, program.base, relocated, landing, end);

  const auto retarget = [&](Word target, Word at) {
    if (!out.addr_map.is_original(target)) {
      throw RelocationError("cannot remap target " + hex(target) + " of " +
                            hex(at));
    }
    return out.addr_map.map_target(target);
  };

  const std::set<Word> relocs(program.relocs.begin(), program.relocs.end());
  for (std::size_t i = 0; i < n; ++i) {
    const Word orig = program.base + 4 * static_cast<Word>(i);
    for (const Instruction& ins : before[i]) {
      out.program.code.push_back(vm::encode(ins));
    }
    Word word = program.code[i];
    if (relocs.count(orig) != 0) {
      Instruction in = program.instruction_at(orig);
      in.imm = retarget(in.imm, orig);
      word = vm::encode(in);
      out.program.relocs.push_back(relocated[i]);
    } else if (const auto in = vm::decode(word);
               in && vm::has_static_target(in->op)) {
      Instruction moved = *in;
      moved.imm = retarget(in->imm, orig);
      word = vm::encode(moved);
    }
    out.program.code.push_back(word);
  }
  out.program.entry = retarget(program.entry, program.entry);
  for (const auto& [name, a] : program.symbols) {
    out.program.symbols[name] =
        out.addr_map.is_original(a) ? out.addr_map.map_target(a) : a;
  }
  return out;
}

vm::Program strip(const InstrumentedProgram& ip) {
  const AddressMap& m = ip.addr_map;
  vm::Program p;
  p.base = m.orig_base();
  p.region = ip.program.region;
  p.ivt = ip.program.ivt;
  if (m.empty()) return ip.program;
  const std::set<Word> relocs(ip.program.relocs.begin(),
                              ip.program.relocs.end());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Word orig = p.base + 4 * static_cast<Word>(i);
    const Word at = m.map_address(orig);
    Word word = ip.program.word_at(at);
    if (relocs.count(at) != 0) {
      Instruction in = ip.program.instruction_at(at);
      in.imm = m.to_original(in.imm);
      word = vm::encode(in);
      p.relocs.push_back(orig);
    } else if (const auto in = vm::decode(word);
               in && vm::has_static_target(in->op)) {
      Instruction moved = *in;
      moved.imm = m.to_original(in->imm);
      word = vm::encode(moved);
    }
    p.code.push_back(word);
  }
  p.entry = m.to_original(ip.program.entry);
  for (const auto& [name, a] : ip.program.symbols) {
    p.symbols[name] = m.to_original(a);
  }
  return p;
}

}  // namespace iscflat::cfg
