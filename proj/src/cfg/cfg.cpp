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

#include "iscflat/cfg/cfg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "iscflat/util/errors.hpp"

namespace iscflat::cfg {

namespace {

using vm::Instruction;
using vm::Opcode;

constexpr std::array<std::string_view, 7> kTerminatorNames = {
    "Direct", "Conditional", "DirectCall", "Indirect",
    "IndirectCall", "Return", "FallthroughToHalt"};
constexpr std::array<std::string_view, 4> kEdgeNames = {
    "Taken", "Fallthrough", "Call", "Return"};

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

Terminator classify(const Instruction& in) {
  switch (in.op) {
    case Opcode::B: return Terminator::Direct;
    case Opcode::Bcc: return Terminator::Conditional;
    case Opcode::Bl: return Terminator::DirectCall;
    case Opcode::Bx: return Terminator::Indirect;
    case Opcode::Blx: return Terminator::IndirectCall;
    case Opcode::Ret: return Terminator::Return;
    default: return Terminator::FallthroughToHalt;
  }
}

template <std::size_t N, typename E>
E parse_enum(const std::array<std::string_view, N>& names,
             const std::string& tok, int line) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == tok) return static_cast<E>(i);
  }
  throw MalformedProgram("cfg line " + std::to_string(line) + ": unknown '" +
                         tok + "'");
}

}  // namespace

std::optional<int> ControlFlowGraph::node_starting_at(Word addr) const {
  const auto it = std::lower_bound(
      nodes.begin(), nodes.end(), addr,
      [](const CfgNode& n, Word a) { return n.start < a; });
  if (it == nodes.end() || it->start != addr) return std::nullopt;
  return it->id;
}

std::optional<int> ControlFlowGraph::node_containing(Word addr) const {
  for (const CfgNode& n : nodes) {
    if (addr >= n.start && addr <= n.end) return n.id;
  }
  return std::nullopt;
}

bool ControlFlowGraph::has_edge(int from, int to) const {
  return std::any_of(edges.begin(), edges.end(), [&](const CfgEdge& e) {
    return e.from == from && e.to == to;
  });
}

bool ControlFlowGraph::has_edge(int from, int to, EdgeKind kind) const {
  return std::any_of(edges.begin(), edges.end(), [&](const CfgEdge& e) {
    return e.from == from && e.to == to && e.kind == kind;
  });
}

bool is_call(Terminator t) {
  return t == Terminator::DirectCall || t == Terminator::IndirectCall;
}

bool has_branch(Terminator t) { return t != Terminator::FallthroughToHalt; }

std::string_view terminator_name(Terminator t) {
  return kTerminatorNames[static_cast<std::size_t>(t)];
}

std::string_view edge_kind_name(EdgeKind k) {
  return kEdgeNames[static_cast<std::size_t>(k)];
}

ControlFlowGraph extract_cfg(const vm::Program& program) {
  ControlFlowGraph g;
  const std::size_t n = program.code.size();
  if (n == 0) return g;
  if (!program.contains(program.entry)) {
    throw MalformedProgram("entry " + hex(program.entry) + " outside program");
  }

  std::vector<Instruction> insns(n);
  for (std::size_t i = 0; i < n; ++i) {
    insns[i] = program.instruction_at(program.base + 4 * static_cast<Word>(i));
  }

  std::set<Word> leaders = {program.base, program.entry};
  std::set<Word> address_taken;
  for (Word r : program.relocs) {
    const Instruction& in = insns[(r - program.base) / 4];
    if (in.op != Opcode::Mov || !in.imm_form) {
      throw MalformedProgram("reloc at " + hex(r) + " is not MOV #imm");
    }
    if (!program.contains(in.imm)) {
      throw MalformedProgram("reloc at " + hex(r) + " names " + hex(in.imm) +
                             " outside the image");
    }
    leaders.insert(in.imm);
    address_taken.insert(in.imm);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Word addr = program.base + 4 * static_cast<Word>(i);
    const Instruction& in = insns[i];
    if (vm::has_static_target(in.op)) {
      if (!program.contains(in.imm)) {
        throw MalformedProgram("branch at " + hex(addr) + " targets " +
                               hex(in.imm) + " outside the image");
      }
      leaders.insert(in.imm);
    }
    if ((vm::is_branch(in.op) || in.op == Opcode::Halt) && i + 1 < n) {
      leaders.insert(addr + 4);
    }
  }

  // Blocks run from one leader to the instruction before the next.
  std::vector<Word> starts(leaders.begin(), leaders.end());
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const Word start = starts[k];
    const Word limit = k + 1 < starts.size() ? starts[k + 1] : program.end();
    CfgNode node;
    node.id = static_cast<int>(k);
    node.start = start;
    node.end = limit - 4;
    node.terminator = classify(insns[(node.end - program.base) / 4]);
    g.nodes.push_back(node);
  }
  g.entry = *g.node_starting_at(program.entry);

  std::vector<int> return_sites;
  std::vector<int> taken_nodes;
  for (Word a : address_taken) taken_nodes.push_back(*g.node_starting_at(a));
  for (const CfgNode& node : g.nodes) {
    if (is_call(node.terminator)) {
      if (auto site = g.node_starting_at(node.end + 4)) {
        return_sites.push_back(*site);
      }
    }
  }

  const auto add = [&](int from, int to, EdgeKind kind) {
    const CfgEdge e{from, to, kind};
    if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) {
      g.edges.push_back(e);
    }
  };
  for (const CfgNode& node : g.nodes) {
    const Instruction& term = insns[(node.end - program.base) / 4];
    const std::optional<int> next = g.node_starting_at(node.end + 4);
    switch (node.terminator) {
      case Terminator::Direct:
        add(node.id, *g.node_starting_at(term.imm), EdgeKind::Taken);
        break;
      case Terminator::Conditional:
        add(node.id, *g.node_starting_at(term.imm), EdgeKind::Taken);
        if (next) add(node.id, *next, EdgeKind::Fallthrough);
        break;
      case Terminator::DirectCall:
        add(node.id, *g.node_starting_at(term.imm), EdgeKind::Call);
        break;
      case Terminator::Indirect:
        for (int t : taken_nodes) add(node.id, t, EdgeKind::Taken);
        break;
      case Terminator::IndirectCall:
        for (int t : taken_nodes) add(node.id, t, EdgeKind::Call);
        break;
      case Terminator::Return:
        for (int t : return_sites) add(node.id, t, EdgeKind::Return);
        break;
      case Terminator::FallthroughToHalt:
        if (term.op != Opcode::Halt && next) {
          add(node.id, *next, EdgeKind::Fallthrough);
        }
        break;
    }
  }
  return g;
}

void write_cfg(std::ostream& os, const ControlFlowGraph& g) {
  os << "cfg v1\n"
     << "entry " << g.entry << '\n'
     << "exit " << hex(g.exit_address) << '\n';
  for (const CfgNode& n : g.nodes) {
    os << "node " << n.id << ' ' << hex(n.start) << ' ' << hex(n.end) << ' '
       << terminator_name(n.terminator) << '\n';
  }
  for (const CfgEdge& e : g.edges) {
    os << "edge " << e.from << ' ' << e.to << ' ' << edge_kind_name(e.kind)
       << '\n';
  }
}

ControlFlowGraph read_cfg(std::istream& is) {
  ControlFlowGraph g;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  const auto num = [&](const std::string& tok) -> Word {
    try {
      std::size_t used = 0;
      const unsigned long v = std::stoul(tok, &used, 0);
      if (used != tok.size() || v > 0xFFFFFFFFul) throw std::out_of_range(tok);
      return static_cast<Word>(v);
    } catch (const std::logic_error&) {
      throw MalformedProgram("cfg line " + std::to_string(lineno) +
                             ": bad number '" + tok + "'");
    }
  };
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::vector<std::string> t;
    for (std::string w; ls >> w;) t.push_back(w);
    if (t.empty() || t[0][0] == '#') continue;
    const auto need = [&](std::size_t k) {
      if (t.size() != k) {
        throw MalformedProgram("cfg line " + std::to_string(lineno) +
                               ": wrong field count");
      }
    };
    if (t[0] == "cfg") {
      need(2);
      if (t[1] != "v1") throw MalformedProgram("unsupported cfg version");
      have_header = true;
    } else if (t[0] == "entry") {
      need(2);
      g.entry = static_cast<int>(num(t[1]));
    } else if (t[0] == "exit") {
      need(2);
      g.exit_address = num(t[1]);
    } else if (t[0] == "node") {
      need(5);
      CfgNode n;
      n.id = static_cast<int>(num(t[1]));
      n.start = num(t[2]);
      n.end = num(t[3]);
      n.terminator = parse_enum<7, Terminator>(kTerminatorNames, t[4], lineno);
      if (n.id != static_cast<int>(g.nodes.size()) || n.end < n.start ||
          (!g.nodes.empty() && n.start <= g.nodes.back().end)) {
        throw MalformedProgram("cfg line " + std::to_string(lineno) +
                               ": nodes must be numbered and ordered");
      }
      g.nodes.push_back(n);
    } else if (t[0] == "edge") {
      need(4);
      CfgEdge e;
      e.from = static_cast<int>(num(t[1]));
      e.to = static_cast<int>(num(t[2]));
      e.kind = parse_enum<4, EdgeKind>(kEdgeNames, t[3], lineno);
      g.edges.push_back(e);
    } else {
      throw MalformedProgram("cfg line " + std::to_string(lineno) +
                             ": unknown record '" + t[0] + "'");
    }
  }
  if (!have_header) throw MalformedProgram("missing 'cfg v1' header");
  const int count = static_cast<int>(g.nodes.size());
  if (count > 0 && (g.entry < 0 || g.entry >= count)) {
    throw MalformedProgram("cfg entry out of range");
  }
  for (const CfgEdge& e : g.edges) {
    if (e.from < 0 || e.from >= count || e.to < 0 || e.to >= count) {
      throw MalformedProgram("cfg edge references unknown node");
    }
  }
  return g;
}

}  // namespace iscflat::cfg
