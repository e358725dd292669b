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

#include "iscflat/vm/isa.hpp"

#include <array>
#include <cstdio>

namespace iscflat::vm {

namespace {

constexpr std::array<std::string_view, kOpcodeCount> kOpcodeNames = {
    "MOV", "ADD", "SUB", "CMP", "LOAD", "STORE", "PUSH", "POP", "B",
    "BCC", "BL",  "BX",  "BLX", "RET",  "NSC_CALL", "WFI", "HALT"};

constexpr std::array<std::string_view, 8> kCondNames = {
    "EQ", "NE", "LT", "GE", "GT", "LE", "LO", "HS"};

std::string reg_name(std::uint8_t r) {
  if (r == kRegSp) return "SP";
  if (r == kRegLr) return "LR";
  return "R" + std::to_string(r);
}

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

}  // namespace

Word encode(const Instruction& in) {
  return (static_cast<Word>(in.op) << 27) | (in.imm_form ? 1u << 26 : 0u) |
         (static_cast<Word>(in.rd & 0xF) << 22) |
         (static_cast<Word>(in.rs & 0xF) << 18) | (in.imm & kImmMask);
}

std::optional<Instruction> decode(Word raw) {
  const Word op = raw >> 27;
  if (op >= kOpcodeCount) return std::nullopt;
  Instruction in;
  in.op = static_cast<Opcode>(op);
  in.imm_form = (raw >> 26) & 1u;
  in.rd = static_cast<std::uint8_t>((raw >> 22) & 0xF);
  in.rs = static_cast<std::uint8_t>((raw >> 18) & 0xF);
  in.imm = raw & kImmMask;
  if (in.rd == 15) return std::nullopt;
  if (in.op == Opcode::Bcc) {
    if (in.rs >= kCondNames.size()) return std::nullopt;
  } else if (in.rs == 15) {
    return std::nullopt;
  }
  return in;
}

std::string_view opcode_name(Opcode op) {
  return kOpcodeNames[static_cast<std::size_t>(op)];
}

std::string_view cond_name(Cond c) {
  return kCondNames[static_cast<std::size_t>(c)];
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kOpcodeNames.size(); ++i) {
    if (kOpcodeNames[i] == name) return static_cast<Opcode>(i);
  }
  return std::nullopt;
}

std::optional<Cond> cond_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCondNames.size(); ++i) {
    if (kCondNames[i] == name) return static_cast<Cond>(i);
  }
  return std::nullopt;
}

std::string disassemble(const Instruction& in) {
  std::string out;
  const auto operand2 = [&] {
    return in.imm_form ? "#" + hex(in.imm) : reg_name(in.rs);
  };
  switch (in.op) {
    case Opcode::Mov:
    case Opcode::Add:
    case Opcode::Sub:
    case Opcode::Cmp:
      out = std::string(opcode_name(in.op)) + " " + reg_name(in.rd) + ", " +
            operand2();
      break;
    case Opcode::Load:
    case Opcode::Store:
      out = std::string(opcode_name(in.op)) + " " + reg_name(in.rd) + ", [" +
            reg_name(in.rs) + ", #" + hex(in.imm) + "]";
      break;
    case Opcode::Push:
    case Opcode::Pop:
    case Opcode::Bx:
    case Opcode::Blx:
      out = std::string(opcode_name(in.op)) + " " + reg_name(in.rd);
      break;
    case Opcode::B:
    case Opcode::Bl:
      out = std::string(opcode_name(in.op)) + " " + hex(in.imm);
      break;
    case Opcode::Bcc:
      out = "B" + std::string(cond_name(static_cast<Cond>(in.rs))) + " " +
            hex(in.imm);
      break;
    case Opcode::NscCall:
      out = "NSC_CALL #" + std::to_string(in.imm);
      break;
    case Opcode::Ret:
    case Opcode::Wfi:
    case Opcode::Halt:
      out = std::string(opcode_name(in.op));
      break;
  }
  return out;
}

bool is_branch(Opcode op) {
  switch (op) {
    case Opcode::B:
    case Opcode::Bcc:
    case Opcode::Bl:
    case Opcode::Bx:
    case Opcode::Blx:
    case Opcode::Ret:
      return true;
    default:
      return false;
  }
}

bool has_static_target(Opcode op) {
  return op == Opcode::B || op == Opcode::Bcc || op == Opcode::Bl;
}

Instruction mov_imm(std::uint8_t rd, Word imm) {
  return {Opcode::Mov, rd, 0, true, imm};
}
Instruction mov_reg(std::uint8_t rd, std::uint8_t rs) {
  return {Opcode::Mov, rd, rs, false, 0};
}
Instruction add_imm(std::uint8_t rd, Word imm) {
  return {Opcode::Add, rd, 0, true, imm};
}
Instruction sub_imm(std::uint8_t rd, Word imm) {
  return {Opcode::Sub, rd, 0, true, imm};
}
Instruction cmp_imm(std::uint8_t rd, Word imm) {
  return {Opcode::Cmp, rd, 0, true, imm};
}
Instruction load(std::uint8_t rd, std::uint8_t base, Word offset) {
  return {Opcode::Load, rd, base, false, offset};
}
Instruction store(std::uint8_t rd, std::uint8_t base, Word offset) {
  return {Opcode::Store, rd, base, false, offset};
}
Instruction push(std::uint8_t rd) { return {Opcode::Push, rd, 0, false, 0}; }
Instruction pop(std::uint8_t rd) { return {Opcode::Pop, rd, 0, false, 0}; }
Instruction branch(Word target) { return {Opcode::B, 0, 0, false, target}; }
Instruction branch_if(Cond c, Word target) {
  return {Opcode::Bcc, 0, static_cast<std::uint8_t>(c), false, target};
}
Instruction call(Word target) { return {Opcode::Bl, 0, 0, false, target}; }
Instruction jump_reg(std::uint8_t rd) { return {Opcode::Bx, rd, 0, false, 0}; }
Instruction call_reg(std::uint8_t rd) {
  return {Opcode::Blx, rd, 0, false, 0};
}
Instruction ret() { return {Opcode::Ret, 0, 0, false, 0}; }
Instruction nsc_call(Word service) {
  return {Opcode::NscCall, 0, 0, false, service};
}
Instruction halt() { return {Opcode::Halt, 0, 0, false, 0}; }

}  // namespace iscflat::vm
