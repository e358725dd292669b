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

// Remote verification engine.
//
// A log is a sequence of node records. Each node contributes its entry
// address (the node start) followed, when it ends in a branch, by one exit
// record: the terminator address for direct branches and calls, the actual
// destination for indirect branches, indirect calls and returns. Blocks
// that just fall through contribute only their entry. The App's top-level
// return logs the CFG's exit address, which must be the final record.

#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "iscflat/cfg/cfg.hpp"
#include "iscflat/secure/report.hpp"

namespace iscflat::verify {

using vm::Word;

enum class Outcome : std::uint8_t {
  Accept,
  RejectSignature,
  RejectBinary,
  RejectStale,
  RejectControlFlow,
  RejectReturn,
};

std::string_view outcome_name(Outcome o);

struct Verdict {
  Outcome outcome = Outcome::Accept;
  std::optional<std::size_t> violation_index;
  std::string detail;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct Violation {
  std::size_t index = 0;
  std::string reason;
};

std::optional<Violation> walk_cflog(const std::vector<Word>& log,
                                    const cfg::ControlFlowGraph& g);
std::optional<Violation> shadow_stack_check(const std::vector<Word>& log,
                                            const cfg::ControlFlowGraph& g);

// Issued challenges, each accepted at most once. Thread-safe.
class NonceRegistry {
 public:
  void issue(const secure::Challenge& chl);
  // True exactly once per issued challenge.
  bool consume(const secure::Challenge& chl);
  bool outstanding(const secure::Challenge& chl) const;

 private:
  struct Record {
    std::chrono::system_clock::time_point issued;
    bool used = false;
  };
  mutable std::mutex mu_;
  std::map<secure::Challenge, Record> issued_;
};

struct VerificationPolicy {
  secure::Digest expected_h_app{};
  cfg::ControlFlowGraph cfg;
  secure::PublicKey pk{};
  NonceRegistry* nonces = nullptr;  // required
};

// Checks signature, binary, freshness, control flow and returns in that
// order and reports the first failure. Throws MalformedKey for a bad pk.
Verdict verify_report(const secure::Report& report,
                      const VerificationPolicy& policy);

std::string verdict_json(const Verdict& v);
std::string explain(const Verdict& v, const std::vector<Word>& log);

}  // namespace iscflat::verify
