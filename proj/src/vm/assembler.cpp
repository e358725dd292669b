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

#include "iscflat/vm/assembler.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include "iscflat/util/errors.hpp"

namespace iscflat::vm {

namespace {

struct Line {
  int number = 0;
  std::string mnemonic;  // upper-cased
  std::vector<std::string> operands;
  Word addr = 0;
};

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  return s;
}

bool is_ident(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') {
    return false;
  }
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '.' || c == ':';
  });
}

// Splits operands on commas that are not inside brackets.
std::vector<std::string> split_operands(std::string_view s) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

class Assembler {
 public:
  Assembler(Word base, const std::map<std::string, Word>& externals)
      : base_(base), externals_(externals), constants_(predefined_symbols()) {}

  Program run(std::string_view source) {
    first_pass(source);
    Program p;
    p.base = base_;
    p.symbols = labels_;
    for (const Line& l : lines_) p.code.push_back(encode_line(l, p));
    if (entry_label_) {
      p.entry = resolve_label(*entry_label_, entry_line_);
    } else {
      p.entry = base_;
    }
    for (const auto& [irq, label] : ivt_) {
      p.ivt[irq.first] = resolve_label(label, irq.second);
    }
    return p;
  }

 private:
  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw MalformedProgram("line " + std::to_string(line) + ": " + msg);
  }

  void first_pass(std::string_view source) {
    std::istringstream in{std::string(source)};
    std::string raw;
    int number = 0;
    Word addr = base_;
    while (std::getline(in, raw)) {
      ++number;
      std::string text = raw;
      for (const char* marker : {";", "//"}) {
        const auto pos = text.find(marker);
        if (pos != std::string::npos) text.erase(pos);
      }
      text = trim(text);
      // Leading labels.
      while (true) {
        const auto colon = text.find(':');
        if (colon == std::string::npos) break;
        const std::string head = trim(text.substr(0, colon));
        if (head.find_first_of(" \t#[") != std::string::npos ||
            !is_ident(head)) {
          break;
        }
        if (labels_.count(head) != 0) fail(number, "duplicate label " + head);
        labels_[head] = addr;
        text = trim(text.substr(colon + 1));
      }
      if (text.empty()) continue;
      const auto sp = text.find_first_of(" \t");
      Line l;
      l.number = number;
      l.mnemonic = upper(text.substr(0, sp));
      if (sp != std::string::npos) l.operands = split_operands(text.substr(sp));
      if (l.mnemonic == ".ENTRY") {
        if (l.operands.size() != 1) fail(number, ".entry needs one label");
        entry_label_ = l.operands[0];
        entry_line_ = number;
        continue;
      }
      if (l.mnemonic == ".IVT") {
        const auto ops = split_ws(l.operands);
        if (ops.size() != 2) fail(number, ".ivt needs irq and label");
        const Word irq = parse_number(ops[0], number);
        if (irq >= static_cast<Word>(mem::kIrqCount)) {
          fail(number, "irq out of range");
        }
        ivt_[{static_cast<int>(irq), number}] = ops[1];
        continue;
      }
      l.addr = addr;
      addr += kInstrBytes;
      lines_.push_back(std::move(l));
    }
  }

  static std::vector<std::string> split_ws(const std::vector<std::string>& ops) {
    std::vector<std::string> out;
    for (const auto& o : ops) {
      std::istringstream ss(o);
      for (std::string t; ss >> t;) out.push_back(t);
    }
    return out;
  }

  Word parse_number(const std::string& tok, int line) const {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used, 0);
      if (used != tok.size() || v > 0xFFFFFFFFul) throw std::out_of_range(tok);
      return static_cast<Word>(v);
    } catch (const std::logic_error&) {
      fail(line, "bad number '" + tok + "'");
    }
  }

  Word resolve_label(const std::string& name, int line) const {
    const auto it = labels_.find(name);
    if (it == labels_.end()) fail(line, "unknown label " + name);
    return it->second;
  }

  // Resolves NAME, NAME+off, or a number. Sets *is_code when the value is a
  // label of this program.
  Word value(const std::string& tok, int line, bool* is_code) const {
    if (is_code) *is_code = false;
    if (tok.empty()) fail(line, "missing operand");
    if (std::isdigit(static_cast<unsigned char>(tok[0]))) {
      return parse_number(tok, line);
    }
    std::string name = tok;
    Word offset = 0;
    if (const auto plus = tok.find('+'); plus != std::string::npos) {
      name = trim(tok.substr(0, plus));
      offset = parse_number(trim(tok.substr(plus + 1)), line);
    }
    if (const auto it = labels_.find(name); it != labels_.end()) {
      if (is_code) *is_code = offset == 0;
      return it->second + offset;
    }
    if (const auto it = externals_.find(name); it != externals_.end()) {
      return it->second + offset;
    }
    if (const auto it = constants_.find(name); it != constants_.end()) {
      return it->second + offset;
    }
    fail(line, "unknown symbol " + name);
  }

  std::optional<std::uint8_t> reg(const std::string& tok) const {
    const std::string u = upper(tok);
    if (u == "SP") return kRegSp;
    if (u == "LR") return kRegLr;
    if (u.size() >= 2 && u[0] == 'R') {
      try {
        std::size_t used = 0;
        const int n = std::stoi(u.substr(1), &used, 10);
        if (used == u.size() - 1 && n >= 0 && n < kGeneralRegs) {
          return static_cast<std::uint8_t>(n);
        }
      } catch (const std::logic_error&) {
      }
    }
    return std::nullopt;
  }

  std::uint8_t need_reg(const std::string& tok, int line) const {
    const auto r = reg(tok);
    if (!r) fail(line, "expected register, got '" + tok + "'");
    return *r;
  }

  Word imm18(Word v, int line) const {
    if (!fits_imm(v)) fail(line, "immediate does not fit in 18 bits");
    return v;
  }

  void expect_ops(const Line& l, std::size_t n) const {
    if (l.operands.size() != n) {
      fail(l.number, l.mnemonic + " expects " + std::to_string(n) +
                         " operand(s)");
    }
  }

  Word encode_line(const Line& l, Program& p) const {
    if (l.mnemonic == ".WORD") {
      expect_ops(l, 1);
      return value(l.operands[0], l.number, nullptr);
    }
    Instruction in;
    std::string m = l.mnemonic;
    std::optional<Cond> cond;
    if (!opcode_from_name(m) && m.size() == 3 && m[0] == 'B') {
      cond = cond_from_name(m.substr(1));
      if (cond) m = "BCC";
    }
    const auto op = opcode_from_name(m);
    if (!op || (*op == Opcode::Bcc && !cond)) {
      fail(l.number, "unknown mnemonic " + l.mnemonic);
    }
    in.op = *op;
    switch (in.op) {
      case Opcode::Mov:
      case Opcode::Add:
      case Opcode::Sub:
      case Opcode::Cmp: {
        expect_ops(l, 2);
        in.rd = need_reg(l.operands[0], l.number);
        const std::string& src = l.operands[1];
        if (!src.empty() && src[0] == '#') {
          bool is_code = false;
          in.imm_form = true;
          in.imm = imm18(value(trim(src.substr(1)), l.number, &is_code),
                         l.number);
          if (is_code && in.op == Opcode::Mov) p.relocs.push_back(l.addr);
        } else {
          in.rs = need_reg(src, l.number);
        }
        break;
      }
      case Opcode::Load:
      case Opcode::Store: {
        expect_ops(l, 2);
        in.rd = need_reg(l.operands[0], l.number);
        std::string mem_op = l.operands[1];
        if (mem_op.size() < 3 || mem_op.front() != '[' || mem_op.back() != ']') {
          fail(l.number, "expected [Rn] or [Rn, #imm]");
        }
        const auto parts =
            split_operands(std::string_view(mem_op).substr(1, mem_op.size() - 2));
        in.rs = need_reg(parts.at(0), l.number);
        if (parts.size() == 2) {
          if (parts[1].empty() || parts[1][0] != '#') {
            fail(l.number, "offset must be #imm");
          }
          in.imm = imm18(value(trim(parts[1].substr(1)), l.number, nullptr),
                         l.number);
        } else if (parts.size() != 1) {
          fail(l.number, "bad memory operand");
        }
        break;
      }
      case Opcode::Push:
      case Opcode::Pop:
      case Opcode::Bx:
      case Opcode::Blx:
        expect_ops(l, 1);
        in.rd = need_reg(l.operands[0], l.number);
        break;
      case Opcode::B:
      case Opcode::Bcc:
      case Opcode::Bl:
        expect_ops(l, 1);
        in.imm = imm18(value(l.operands[0], l.number, nullptr), l.number);
        if (cond) in.rs = static_cast<std::uint8_t>(*cond);
        break;
      case Opcode::NscCall: {
        expect_ops(l, 1);
        std::string t = l.operands[0];
        if (!t.empty() && t[0] == '#') t = trim(t.substr(1));
        in.imm = imm18(value(t, l.number, nullptr), l.number);
        break;
      }
      case Opcode::Ret:
      case Opcode::Wfi:
      case Opcode::Halt:
        expect_ops(l, 0);
        break;
    }
    return encode(in);
  }

  Word base_;
  const std::map<std::string, Word>& externals_;
  std::map<std::string, Word> constants_;
  std::map<std::string, Word> labels_;
  std::vector<Line> lines_;
  std::optional<std::string> entry_label_;
  int entry_line_ = 0;
  std::map<std::pair<int, int>, std::string> ivt_;
};

}  // namespace

std::map<std::string, Word> predefined_symbols() {
  return {
      {"GATE_ENTRY", mem::kGateEntry},
      {"GATE_DEST", mem::kGateDest},
      {"DISPATCHER_EXIT", mem::kDispatcherExitGate},
      {"FINALIZE", mem::kFinalizeGate},
      {"TIMER_BASE", mem::kTimerBase},
      {"MPU_BASE", mem::kMpuBase},
      {"ITNS_BASE", mem::kItnsBase},
      {"SECURE_IVT", mem::kSecureIvtBase},
      {"NS_IVT", mem::kNsIvtBase},
      {"APP_DATA", mem::kAppDataBase},
      {"ISR_DATA", mem::kIsrDataBase},
  };
}

Program assemble(std::string_view source, Word base,
                 const std::map<std::string, Word>& externals) {
  return Assembler(base, externals).run(source);
}

Program assemble_file(const std::filesystem::path& path, Word base,
                      const std::map<std::string, Word>& externals) {
  std::ifstream in(path);
  if (!in) throw MalformedProgram("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return assemble(ss.str(), base, externals);
  } catch (const MalformedProgram& e) {
    throw MalformedProgram(path.filename().string() + ": " + e.what());
  }
}

}  // namespace iscflat::vm
