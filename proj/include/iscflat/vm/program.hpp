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

// Loadable program images.
//
// An image is a flat little-endian binary of encoded instructions plus a
// textual manifest, one "key value..." record per line:
//
//   format iscflat-image-v1
//   binary app.bin           binary file, relative to the manifest
//   base 0x8000              load address of the first word
//   entry 0x8000
//   size 12                  number of words in the binary
//   region app_code          informational
//   reloc 0x8010             MOV whose immediate is a code address
//   symbol main 0x8000
//   ivt 3 0x10000            non-secure IVT entry installed with the image
//
// Blank lines and lines starting with '#' are ignored.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "iscflat/vm/isa.hpp"
#include "iscflat/vm/memory_map.hpp"

namespace iscflat::vm {

struct Program {
  Word base = mem::kAppCodeBase;
  Word entry = mem::kAppCodeBase;
  std::vector<Word> code;
  // Addresses of MOV instructions whose immediate names a code address
  // inside this program. They make their target address-taken.
  std::vector<Word> relocs;
  std::map<std::string, Word> symbols;
  std::map<int, Word> ivt;
  std::string region = "app_code";

  Word end() const { return base + static_cast<Word>(code.size()) * 4; }
  bool contains(Word addr) const {
    return addr >= base && addr < end() && (addr - base) % 4 == 0;
  }
  Word word_at(Word addr) const { return code.at((addr - base) / 4); }
  // Throws MalformedProgram for undecodable words.
  Instruction instruction_at(Word addr) const;
  std::vector<std::uint8_t> bytes() const;

  friend bool operator==(const Program&, const Program&) = default;
};

// Throws MalformedProgram on a bad manifest or binary.
void save_image(const Program& p, const std::filesystem::path& manifest);
Program load_image(const std::filesystem::path& manifest);

}  // namespace iscflat::vm
