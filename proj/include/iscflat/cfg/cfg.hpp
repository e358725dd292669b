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

// Control-flow graph of an application image.
//
// Nodes are basic blocks: a run of non-branching instructions closed by one
// branching terminator. A block also closes at HALT or just before the next
// leader; such blocks carry the FallthroughToHalt kind and have no branch.
//
// Text format (read by the verifier, written by the instrumenter):
//
//   cfg v1
//   entry 0
//   exit 0x200c
//   node <id> <start> <end> <Terminator>
//   edge <from> <to> <Taken|Fallthrough|Call|Return>

#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "iscflat/vm/program.hpp"

namespace iscflat::cfg {

using vm::Word;

enum class Terminator : std::uint8_t {
  Direct,
  Conditional,
  DirectCall,
  Indirect,
  IndirectCall,
  Return,
  FallthroughToHalt,
};

enum class EdgeKind : std::uint8_t { Taken, Fallthrough, Call, Return };

struct CfgNode {
  int id = 0;
  Word start = 0;
  Word end = 0;  // address of the terminator (last instruction of the block)
  Terminator terminator = Terminator::FallthroughToHalt;

  Word size_bytes() const { return end - start + vm::kInstrBytes; }
  friend bool operator==(const CfgNode&, const CfgNode&) = default;
};

struct CfgEdge {
  int from = 0;
  int to = 0;
  EdgeKind kind = EdgeKind::Taken;

  friend bool operator==(const CfgEdge&, const CfgEdge&) = default;
};

struct ControlFlowGraph {
  std::vector<CfgNode> nodes;  // ordered by start address; nodes[i].id == i
  std::vector<CfgEdge> edges;
  int entry = 0;
  // Destination logged by the App's top-level return.
  Word exit_address = vm::mem::kFinalizeGate;

  std::optional<int> node_starting_at(Word addr) const;
  std::optional<int> node_containing(Word addr) const;
  bool has_edge(int from, int to) const;
  bool has_edge(int from, int to, EdgeKind kind) const;

  friend bool operator==(const ControlFlowGraph&,
                         const ControlFlowGraph&) = default;
};

bool is_call(Terminator t);
bool has_branch(Terminator t);
std::string_view terminator_name(Terminator t);
std::string_view edge_kind_name(EdgeKind k);

// Throws MalformedProgram for undecodable words or direct targets outside
// the image.
ControlFlowGraph extract_cfg(const vm::Program& program);

void write_cfg(std::ostream& os, const ControlFlowGraph& g);
// Throws MalformedProgram on syntax errors or inconsistent ids.
ControlFlowGraph read_cfg(std::istream& is);

}  // namespace iscflat::cfg
