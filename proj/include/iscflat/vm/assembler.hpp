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

// Two-pass assembler for the textual program format used by the corpus.
//
//   ; comment            (also "//")
//   .entry main
//   .ivt 3 isr_tick      NS IVT entry for irq 3
//   .word 0xdeadbeef     raw data word
//   main: MOV R0, #5
//         MOV R1, #handler     code-address immediate, recorded as a reloc
//         MOV R2, #APP_DATA+8  predefined constant plus offset
//         MOV R3, #app:gadget  symbol supplied by the caller
//         LOAD R0, [SP, #0x18]
//         BEQ done
//         BL GATE_ENTRY
//
// Predefined constants: GATE_ENTRY, GATE_DEST, DISPATCHER_EXIT, FINALIZE,
// TIMER_BASE, MPU_BASE, ITNS_BASE, SECURE_IVT, NS_IVT, APP_DATA, ISR_DATA.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "iscflat/vm/program.hpp"

namespace iscflat::vm {

std::map<std::string, Word> predefined_symbols();

// Throws MalformedProgram with a line number on any error.
Program assemble(std::string_view source, Word base,
                 const std::map<std::string, Word>& externals = {});
Program assemble_file(const std::filesystem::path& path, Word base,
                      const std::map<std::string, Word>& externals = {});

}  // namespace iscflat::vm
