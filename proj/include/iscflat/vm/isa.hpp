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

// Instruction set of the simulated MCU.
//
// Every instruction is one little-endian 32-bit word:
//
//   31      27 26 25  22 21  18 17                0
//   +---------+--+------+------+-------------------+
//   | opcode  |I |  rd  |  rs  |       imm18       |
//   +---------+--+------+------+-------------------+
//
// I selects the immediate form of MOV/ADD/SUB/CMP. For Bcc the rs field
// carries the condition code. Register 13 is the active stack pointer and
// register 14 the link register; 15 is not addressable.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace iscflat::vm {

using Word = std::uint32_t;

enum class Opcode : std::uint8_t {
  Mov,
  Add,
  Sub,
  Cmp,
  Load,
  Store,
  Push,
  Pop,
  B,
  Bcc,
  Bl,
  Bx,
  Blx,
  Ret,
  NscCall,
  Wfi,
  Halt,
};

inline constexpr int kOpcodeCount = 17;

enum class Cond : std::uint8_t { EQ, NE, LT, GE, GT, LE, LO, HS };

inline constexpr std::uint8_t kRegSp = 13;
inline constexpr std::uint8_t kRegLr = 14;
inline constexpr int kGeneralRegs = 13;
inline constexpr Word kImmMask = (1u << 18) - 1;
inline constexpr Word kInstrBytes = 4;

struct Instruction {
  Opcode op = Opcode::Halt;
  std::uint8_t rd = 0;
  std::uint8_t rs = 0;  // condition code for Bcc
  bool imm_form = false;
  Word imm = 0;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

// Encodes `in`; immediates wider than 18 bits are truncated, so callers that
// build instructions from untrusted input should check fits_imm() first.
Word encode(const Instruction& in);

// Returns nullopt for undecodable words (bad opcode or register index).
std::optional<Instruction> decode(Word raw);

constexpr bool fits_imm(Word v) { return v <= kImmMask; }

std::string_view opcode_name(Opcode op);
std::string_view cond_name(Cond c);
std::optional<Opcode> opcode_from_name(std::string_view name);
std::optional<Cond> cond_from_name(std::string_view name);

std::string disassemble(const Instruction& in);

// Instruction classification used by the CFG pass.
bool is_branch(Opcode op);
bool has_static_target(Opcode op);

// Convenience constructors.
Instruction mov_imm(std::uint8_t rd, Word imm);
Instruction mov_reg(std::uint8_t rd, std::uint8_t rs);
Instruction add_imm(std::uint8_t rd, Word imm);
Instruction sub_imm(std::uint8_t rd, Word imm);
Instruction cmp_imm(std::uint8_t rd, Word imm);
Instruction load(std::uint8_t rd, std::uint8_t base, Word offset);
Instruction store(std::uint8_t rd, std::uint8_t base, Word offset);
Instruction push(std::uint8_t rd);
Instruction pop(std::uint8_t rd);
Instruction branch(Word target);
Instruction branch_if(Cond c, Word target);
Instruction call(Word target);
Instruction jump_reg(std::uint8_t rd);
Instruction call_reg(std::uint8_t rd);
Instruction ret();
Instruction nsc_call(Word service);
Instruction halt();

}  // namespace iscflat::vm
