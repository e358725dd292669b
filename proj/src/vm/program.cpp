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

#include "iscflat/vm/program.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "iscflat/util/errors.hpp"

namespace iscflat::vm {

namespace {

constexpr std::string_view kFormat = "iscflat-image-v1";

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

Word parse_word(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(tok, &used, 0);
    if (used != tok.size() || v > 0xFFFFFFFFul) throw std::out_of_range(tok);
    return static_cast<Word>(v);
  } catch (const std::logic_error&) {
    throw MalformedProgram(where + ": bad number '" + tok + "'");
  }
}

}  // namespace

Instruction Program::instruction_at(Word addr) const {
  if (!contains(addr)) {
    throw MalformedProgram("address " + hex(addr) + " outside program");
  }
  const auto in = decode(word_at(addr));
  if (!in) throw MalformedProgram("undecodable word at " + hex(addr));
  return *in;
}

std::vector<std::uint8_t> Program::bytes() const {
  std::vector<std::uint8_t> out;
  out.reserve(code.size() * 4);
  for (Word w : code) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(w >> (8 * i)));
  }
  return out;
}

void save_image(const Program& p, const std::filesystem::path& manifest) {
  std::filesystem::path bin = manifest;
  bin.replace_extension(".bin");
  {
    std::ofstream out(bin, std::ios::binary);
    const auto b = p.bytes();
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(b.size()));
    if (!out) throw MalformedProgram("cannot write " + bin.string());
  }
  std::ofstream m(manifest);
  m << "format " << kFormat << '\n'
    << "binary " << bin.filename().string() << '\n'
    << "base " << hex(p.base) << '\n'
    << "entry " << hex(p.entry) << '\n'
    << "size " << p.code.size() << '\n'
    << "region " << p.region << '\n';
  for (Word r : p.relocs) m << "reloc " << hex(r) << '\n';
  for (const auto& [name, addr] : p.symbols) {
    m << "symbol " << name << ' ' << hex(addr) << '\n';
  }
  for (const auto& [irq, addr] : p.ivt) {
    m << "ivt " << irq << ' ' << hex(addr) << '\n';
  }
  if (!m) throw MalformedProgram("cannot write " + manifest.string());
}

Program load_image(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw MalformedProgram("cannot open " + manifest.string());
  Program p;
  p.code.clear();
  std::string binary;
  std::size_t size = 0;
  bool have_format = false;
  bool have_size = false;
  bool have_entry = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = manifest.filename().string() + ":" +
                              std::to_string(lineno);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key) || key[0] == '#') continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);
    const auto need = [&](std::size_t n) {
      if (args.size() != n) {
        throw MalformedProgram(where + ": '" + key + "' expects " +
                               std::to_string(n) + " value(s)");
      }
    };
    if (key == "format") {
      need(1);
      if (args[0] != kFormat) {
        throw MalformedProgram(where + ": unsupported format " + args[0]);
      }
      have_format = true;
    } else if (key == "binary") {
      need(1);
      binary = args[0];
    } else if (key == "base") {
      need(1);
      p.base = parse_word(args[0], where);
    } else if (key == "entry") {
      need(1);
      p.entry = parse_word(args[0], where);
      have_entry = true;
    } else if (key == "size") {
      need(1);
      size = parse_word(args[0], where);
      have_size = true;
    } else if (key == "region") {
      need(1);
      p.region = args[0];
    } else if (key == "reloc") {
      need(1);
      p.relocs.push_back(parse_word(args[0], where));
    } else if (key == "symbol") {
      need(2);
      p.symbols[args[0]] = parse_word(args[1], where);
    } else if (key == "ivt") {
      need(2);
      const Word irq = parse_word(args[0], where);
      if (irq >= static_cast<Word>(mem::kIrqCount)) {
        throw MalformedProgram(where + ": irq out of range");
      }
      p.ivt[static_cast<int>(irq)] = parse_word(args[1], where);
    } else {
      throw MalformedProgram(where + ": unknown key '" + key + "'");
    }
  }
  if (!have_format || binary.empty() || !have_size) {
    throw MalformedProgram(manifest.string() +
                           ": manifest needs format, binary and size");
  }
  if (!have_entry) p.entry = p.base;
  const std::filesystem::path bin = manifest.parent_path() / binary;
  std::ifstream b(bin, std::ios::binary);
  if (!b) throw MalformedProgram("cannot open " + bin.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(b)),
                        std::istreambuf_iterator<char>());
  if (raw.size() != size * 4) {
    throw MalformedProgram(bin.string() + ": expected " +
                           std::to_string(size * 4) + " bytes, found " +
                           std::to_string(raw.size()));
  }
  p.code.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    Word w = 0;
    for (int k = 0; k < 4; ++k) {
      w |= static_cast<Word>(static_cast<std::uint8_t>(raw[4 * i + k])) << (8 * k);
    }
    p.code[i] = w;
  }
  for (Word r : p.relocs) {
    if (!p.contains(r)) {
      throw MalformedProgram("reloc " + hex(r) + " outside program");
    }
  }
  return p;
}

}  // namespace iscflat::vm
