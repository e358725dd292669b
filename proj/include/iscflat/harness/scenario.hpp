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

// Attack scenarios as data.
//
// A scenario file is a list of "key = value" lines ('#' starts a comment):
//
//   name       = ex2-retaddr
//   mode       = baseline | iscflat
//   app        = ../programs/two_task_app.s   assembled at the App code base
//   instrument = yes | no                 "no" deploys the original image
//   isr        = ../programs/ex2_isr.s    repeatable; .ivt binds the irqs
//   priority.3 = 4                        NVIC priority of irq 3
//   schedule   = 13:3, 40:4               instructions after App start : irq
//   tamper     = none | forge-signature
//   output     = yes | no                 bind R0 as the report's out
//   max_steps  = 100000
//   expect     = accepted | unreliable | noreport | fault:<FaultKind>
//                | rejected:<signature|binary|stale|control-flow|return>
//   log_digest = <hex blake2s of the CFLog as LE words>   optional
//
// Paths are relative to the scenario file. ISR sources may reference App
// symbols of the deployed image as "app:<label>".

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iscflat/cfg/instrument.hpp"
#include "iscflat/harness/device.hpp"
#include "iscflat/verifier/verifier.hpp"

namespace iscflat::harness {

enum class Mode : std::uint8_t { Baseline, IscFlat };

enum class OutcomeKind : std::uint8_t {
  Accepted,
  AcceptedButUnreliable,
  Fault,
  NoReport,
  Rejected,
};

struct Outcome {
  OutcomeKind kind = OutcomeKind::NoReport;
  std::optional<vm::FaultKind> fault;      // Fault only
  std::optional<verify::Outcome> reason;   // Rejected only

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

std::string outcome_text(const Outcome& o);
// Parses the `expect` syntax. Throws HarnessError.
Outcome parse_outcome(const std::string& text);

enum class Tamper : std::uint8_t { None, ForgeSignature };

struct Scenario {
  std::string name;
  std::filesystem::path source;  // scenario file, empty for in-memory ones
  Mode mode = Mode::IscFlat;
  std::filesystem::path app;
  bool instrument = true;
  std::vector<std::filesystem::path> isrs;
  std::map<int, int> priority;
  std::vector<std::pair<std::uint64_t, int>> schedule;
  Tamper tamper = Tamper::None;
  bool bind_output = false;
  std::uint64_t max_steps = 100'000;
  Outcome expected;
  std::optional<secure::Digest> log_digest;
};

// Throws HarnessError naming the file and line.
Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& source = {});
Scenario load_scenario(const std::filesystem::path& path);

// Every *.scn file under `dir`, sorted by file name.
std::vector<Scenario> load_corpus(const std::filesystem::path& dir);
// The corpus shipped with the sources.
std::filesystem::path default_corpus_dir();
std::vector<Scenario> corpus();

// Everything the verifier needs to know about a genuine App, and the image
// that is actually deployed.
struct BuiltApp {
  vm::Program original;
  cfg::ControlFlowGraph cfg;
  cfg::InstrumentedProgram instrumented;
  secure::Digest expected_h_app{};
  DeviceImage image;
};

// Assembles and instruments the App and ISRs. Throws HarnessError.
BuiltApp build(const Scenario& sc);

struct ScenarioResult {
  std::string name;
  Mode mode = Mode::IscFlat;
  Outcome expected;
  Outcome actual;
  bool passed = false;
  std::string detail;
  AttestStatus status = AttestStatus::Timeout;
  std::optional<secure::Report> report;  // after the wire round trip
  std::optional<verify::Verdict> verdict;
  std::vector<vm::Word> executed;        // App instructions actually retired
  std::vector<vm::Word> logged_path;     // instructions the log accounts for
  vm::Trace trace;
};

// Runs one scenario end to end with a device key and challenge drawn from
// `seed`. Throws HarnessError for malformed scenarios.
ScenarioResult run_scenario(const Scenario& sc, std::uint64_t seed = 1);

// Original-image addresses of App instructions retired in thread context,
// with inserted instrumentation dropped.
std::vector<vm::Word> executed_app_path(const vm::Trace& trace,
                                        const vm::Program& deployed,
                                        const cfg::AddressMap& map);
// Instruction sequence a log attests to: every node it names, start to end.
std::vector<vm::Word> logged_app_path(const std::vector<vm::Word>& log,
                                      const cfg::ControlFlowGraph& g);

std::string_view mode_name(Mode m);

}  // namespace iscflat::harness
