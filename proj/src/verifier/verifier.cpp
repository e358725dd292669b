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

#include "iscflat/verifier/verifier.hpp"

#include <array>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "iscflat/secure/crypto.hpp"

namespace iscflat::verify {

namespace {

using cfg::CfgNode;
using cfg::ControlFlowGraph;
using cfg::EdgeKind;
using cfg::Terminator;

constexpr std::array<std::string_view, 6> kOutcomeNames = {
    "Accept",           "RejectSignature",   "RejectBinary",
    "RejectStale",      "RejectControlFlow", "RejectReturn"};

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

bool logs_destination(Terminator t) {
  return t == Terminator::Indirect || t == Terminator::IndirectCall ||
         t == Terminator::Return;
}

// Callback-driven parse of the record structure shared by both checks.
// `on_exit(node, index)` sees every exit record after its structural
// checks; returning a violation stops the walk.
template <typename OnExit>
std::optional<Violation> parse_log(const std::vector<Word>& log,
                                   const ControlFlowGraph& g, bool check_edges,
                                   OnExit on_exit) {
  const std::size_t n = log.size();
  if (g.nodes.empty()) {
    if (n == 0) return std::nullopt;
    return Violation{0, "log is not empty but the CFG has no nodes"};
  }
  std::optional<int> prev;
  bool has_dest = false;  // prev's exit logged a destination
  Word pending_dest = 0;
  std::size_t i = 0;
  while (true) {
    if (i == n) {
      return Violation{n, prev ? "log ends before the program exit"
                               : "empty log"};
    }
    const Word entry = log[i];
    const std::optional<int> id = g.node_starting_at(entry);
    if (!id) {
      return Violation{i, "entry " + hex(entry) + " is not a node start"};
    }
    if (!prev) {
      if (*id != g.entry) {
        return Violation{i, "first entry " + hex(entry) +
                                " is not the CFG entry"};
      }
    } else if (has_dest) {
      if (pending_dest != entry) {
        return Violation{i, "entry " + hex(entry) +
                                " differs from logged destination " +
                                hex(pending_dest)};
      }
    } else if (check_edges && !g.has_edge(*prev, *id)) {
      return Violation{i, "no edge from node " + std::to_string(*prev) +
                              " to node " + std::to_string(*id)};
    }
    const CfgNode& node = g.nodes[*id];
    ++i;
    has_dest = false;
    if (node.terminator == Terminator::FallthroughToHalt) {
      const bool halts = std::none_of(
          g.edges.begin(), g.edges.end(), [&](const cfg::CfgEdge& e) {
            return e.from == node.id && e.kind == EdgeKind::Fallthrough;
          });
      if (halts) {
        if (i < n) return Violation{i, "records after a halting node"};
        return std::nullopt;
      }
      prev = node.id;
      continue;
    }
    if (i == n) return Violation{n, "log ends inside node " +
                                        std::to_string(node.id)};
    const Word exit = log[i];
    if (!logs_destination(node.terminator)) {
      if (exit != node.end) {
        return Violation{i, "exit " + hex(exit) + " of node " +
                                std::to_string(node.id) +
                                " is not its terminator " + hex(node.end)};
      }
    } else if (exit == g.exit_address &&
               node.terminator == Terminator::Return) {
      if (auto v = on_exit(node, i)) return v;
      if (i + 1 < n) return Violation{i + 1, "records after program exit"};
      return std::nullopt;
    } else {
      const std::optional<int> dest = g.node_starting_at(exit);
      if (!dest) {
        return Violation{i, "destination " + hex(exit) +
                                " is not a node start"};
      }
      if (check_edges && !g.has_edge(node.id, *dest)) {
        return Violation{i, "no edge from node " + std::to_string(node.id) +
                                " to " + hex(exit)};
      }
      has_dest = true;
      pending_dest = exit;
    }
    if (auto v = on_exit(node, i)) return v;
    prev = node.id;
    ++i;
  }
}

}  // namespace

std::string_view outcome_name(Outcome o) {
  return kOutcomeNames[static_cast<std::size_t>(o)];
}

std::optional<Violation> walk_cflog(const std::vector<Word>& log,
                                    const ControlFlowGraph& g) {
  return parse_log(log, g, true,
                   [](const CfgNode&, std::size_t) -> std::optional<Violation> {
                     return std::nullopt;
                   });
}

std::optional<Violation> shadow_stack_check(const std::vector<Word>& log,
                                            const ControlFlowGraph& g) {
  std::vector<Word> stack;
  return parse_log(
      log, g, false,
      [&](const CfgNode& node, std::size_t i) -> std::optional<Violation> {
        if (cfg::is_call(node.terminator)) {
          stack.push_back(node.end + vm::kInstrBytes);
          return std::nullopt;
        }
        if (node.terminator != Terminator::Return) return std::nullopt;
        const Word dest = log[i];
        if (dest == g.exit_address) {
          if (!stack.empty()) {
            return Violation{i, "program exit with " +
                                    std::to_string(stack.size()) +
                                    " call(s) outstanding"};
          }
          return std::nullopt;
        }
        if (stack.empty()) {
          return Violation{i, "return to " + hex(dest) +
                                  " with an empty shadow stack"};
        }
        if (stack.back() != dest) {
          return Violation{i, "return to " + hex(dest) + ", expected " +
                                  hex(stack.back())};
        }
        stack.pop_back();
        return std::nullopt;
      });
}

void NonceRegistry::issue(const secure::Challenge& chl) {
  std::lock_guard<std::mutex> lock(mu_);
  issued_.try_emplace(chl, Record{std::chrono::system_clock::now(), false});
}

bool NonceRegistry::consume(const secure::Challenge& chl) {
  std::lock_guard<std::mutex> lock(mu_);
  const auto it = issued_.find(chl);
  if (it == issued_.end() || it->second.used) return false;
  it->second.used = true;
  return true;
}

bool NonceRegistry::outstanding(const secure::Challenge& chl) const {
  std::lock_guard<std::mutex> lock(mu_);
  const auto it = issued_.find(chl);
  return it != issued_.end() && !it->second.used;
}

Verdict verify_report(const secure::Report& report,
                      const VerificationPolicy& policy) {
  const secure::Bytes message = secure::signed_message(report);
  if (!secure::verify(policy.pk, message, report.sigma)) {
    return {Outcome::RejectSignature, std::nullopt,
            "signature does not verify under the device key"};
  }
  if (report.h_app != policy.expected_h_app) {
    return {Outcome::RejectBinary, std::nullopt,
            "H(App) differs from the expected binary digest"};
  }
  if (policy.nonces == nullptr || !policy.nonces->consume(report.chl)) {
    return {Outcome::RejectStale, std::nullopt,
            "challenge was not issued or was already used"};
  }
  if (auto v = walk_cflog(report.cflog, policy.cfg)) {
    return {Outcome::RejectControlFlow, v->index, v->reason};
  }
  if (auto v = shadow_stack_check(report.cflog, policy.cfg)) {
    return {Outcome::RejectReturn, v->index, v->reason};
  }
  return {Outcome::Accept, std::nullopt, "all checks passed"};
}

std::string verdict_json(const Verdict& v) {
  nlohmann::json j;
  j["outcome"] = std::string(outcome_name(v.outcome));
  j["violation_index"] = v.violation_index
                             ? nlohmann::json(*v.violation_index)
                             : nlohmann::json(nullptr);
  j["detail"] = v.detail;
  return j.dump();
}

std::string explain(const Verdict& v, const std::vector<Word>& log) {
  std::ostringstream os;
  os << outcome_name(v.outcome) << ": " << v.detail;
  if (v.violation_index) {
    const std::size_t i = *v.violation_index;
    os << "\n  first violation at record " << i;
    if (i < log.size()) os << " (value " << hex(log[i]) << ")";
    else os << " (past the last of " << log.size() << " records)";
  }
  return os.str();
}

}  // namespace iscflat::verify
