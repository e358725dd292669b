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

#include "iscflat/harness/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "iscflat/protocol/wire.hpp"
#include "iscflat/util/errors.hpp"
#include "iscflat/util/hex.hpp"
#include "iscflat/vm/assembler.hpp"

#ifndef ISCFLAT_SOURCE_DIR
#define ISCFLAT_SOURCE_DIR "."
#endif

namespace iscflat::harness {

namespace {

constexpr vm::Word kIsrStride = 0x800;

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::uint64_t parse_u64(const std::string& v, const std::string& what) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used, 0);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw HarnessError("bad " + what + ": '" + v + "'");
}

bool parse_bool(const std::string& v, const std::string& what) {
  const std::string l = lower(v);
  if (l == "yes" || l == "true" || l == "1") return true;
  if (l == "no" || l == "false" || l == "0") return false;
  throw HarnessError("bad " + what + ": '" + v + "'");
}

int parse_irq(const std::string& v) {
  const auto n = parse_u64(v, "irq");
  if (n >= static_cast<std::uint64_t>(vm::mem::kIrqCount)) {
    throw HarnessError("irq out of range: " + v);
  }
  return static_cast<int>(n);
}

const std::vector<std::pair<verify::Outcome, std::string_view>>& reasons() {
  static const std::vector<std::pair<verify::Outcome, std::string_view>> r = {
      {verify::Outcome::RejectSignature, "signature"},
      {verify::Outcome::RejectBinary, "binary"},
      {verify::Outcome::RejectStale, "stale"},
      {verify::Outcome::RejectControlFlow, "control-flow"},
      {verify::Outcome::RejectReturn, "return"},
  };
  return r;
}

std::string reason_text(verify::Outcome o) {
  for (const auto& [k, v] : reasons()) {
    if (k == o) return std::string(v);
  }
  return std::string(verify::outcome_name(o));
}

std::filesystem::path resolve(const Scenario& sc,
                              const std::filesystem::path& p) {
  if (p.is_absolute() || sc.source.empty()) return p;
  return sc.source.parent_path() / p;
}

}  // namespace

std::string_view mode_name(Mode m) {
  return m == Mode::Baseline ? "baseline" : "iscflat";
}

std::string outcome_text(const Outcome& o) {
  switch (o.kind) {
    case OutcomeKind::Accepted:
      return "accepted";
    case OutcomeKind::AcceptedButUnreliable:
      return "unreliable";
    case OutcomeKind::Fault:
      return "fault:" + std::string(o.fault ? vm::fault_name(*o.fault) : "?");
    case OutcomeKind::NoReport:
      return "noreport";
    case OutcomeKind::Rejected:
      return "rejected:" + (o.reason ? reason_text(*o.reason) : "?");
  }
  return "?";
}

Outcome parse_outcome(const std::string& text) {
  const std::string t = trim(text);
  const std::string l = lower(t);
  Outcome o;
  if (l == "accepted") {
    o.kind = OutcomeKind::Accepted;
  } else if (l == "unreliable") {
    o.kind = OutcomeKind::AcceptedButUnreliable;
  } else if (l == "noreport") {
    o.kind = OutcomeKind::NoReport;
  } else if (l.rfind("fault:", 0) == 0) {
    o.kind = OutcomeKind::Fault;
    o.fault = vm::fault_from_name(t.substr(6));
    if (!o.fault) throw HarnessError("unknown fault kind: " + t.substr(6));
  } else if (l.rfind("rejected:", 0) == 0) {
    o.kind = OutcomeKind::Rejected;
    for (const auto& [k, v] : reasons()) {
      if (l.substr(9) == v) o.reason = k;
    }
    if (!o.reason) throw HarnessError("unknown rejection reason: " + t.substr(9));
  } else {
    throw HarnessError("unknown expected outcome: " + t);
  }
  return o;
}

Scenario parse_scenario(const std::string& text,
                        const std::filesystem::path& source) {
  Scenario sc;
  sc.source = source;
  bool have_expect = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const std::string where = source.empty() ? "<scenario>" : source.string();
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw HarnessError("expected key = value");
      const std::string key = lower(trim(line.substr(0, eq)));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "name") {
        sc.name = value;
      } else if (key == "mode") {
        const std::string m = lower(value);
        if (m == "baseline") sc.mode = Mode::Baseline;
        else if (m == "iscflat") sc.mode = Mode::IscFlat;
        else throw HarnessError("unknown mode: " + value);
      } else if (key == "app") {
        sc.app = value;
      } else if (key == "instrument") {
        sc.instrument = parse_bool(value, "instrument");
      } else if (key == "isr") {
        sc.isrs.emplace_back(value);
      } else if (key.rfind("priority.", 0) == 0) {
        const auto prio = parse_u64(value, "priority");
        sc.priority[parse_irq(key.substr(9))] = static_cast<int>(prio);
      } else if (key == "schedule") {
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) {
          item = trim(item);
          if (item.empty()) continue;
          const auto colon = item.find(':');
          if (colon == std::string::npos) {
            throw HarnessError("schedule items are <after>:<irq>");
          }
          const auto at = parse_u64(trim(item.substr(0, colon)), "fire point");
          const int irq = parse_irq(trim(item.substr(colon + 1)));
          if (!sc.schedule.empty() && at <= sc.schedule.back().first) {
            throw HarnessError("schedule fire points must strictly increase");
          }
          sc.schedule.emplace_back(at, irq);
        }
      } else if (key == "tamper") {
        const std::string t = lower(value);
        if (t == "none") sc.tamper = Tamper::None;
        else if (t == "forge-signature") sc.tamper = Tamper::ForgeSignature;
        else throw HarnessError("unknown tamper: " + value);
      } else if (key == "output") {
        sc.bind_output = parse_bool(value, "output");
      } else if (key == "max_steps") {
        sc.max_steps = parse_u64(value, "max_steps");
        if (sc.max_steps == 0) throw HarnessError("max_steps must be positive");
      } else if (key == "expect") {
        sc.expected = parse_outcome(value);
        have_expect = true;
      } else if (key == "log_digest") {
        const auto bytes = from_hex(value);
        if (!bytes || bytes->size() != 32) throw HarnessError("bad log_digest");
        secure::Digest d{};
        std::copy(bytes->begin(), bytes->end(), d.begin());
        sc.log_digest = d;
      } else {
        throw HarnessError("unknown key: " + key);
      }
    }
  } catch (const HarnessError& e) {
    throw HarnessError(where + ":" + std::to_string(lineno) + ": " + e.what());
  }
  if (sc.name.empty()) throw HarnessError(where + ": missing name");
  if (sc.app.empty()) throw HarnessError(where + ": missing app");
  if (!have_expect) throw HarnessError(where + ": missing expect");
  if (sc.expected.kind == OutcomeKind::AcceptedButUnreliable &&
      sc.mode != Mode::Baseline) {
    throw HarnessError(where + ": 'unreliable' is only meaningful in baseline mode");
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot read scenario " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

std::vector<Scenario> load_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
    if (e.path().extension() == ".scn") files.push_back(e.path());
  }
  if (ec) throw HarnessError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  for (const auto& f : files) out.push_back(load_scenario(f));
  return out;
}

std::filesystem::path default_corpus_dir() {
  return std::filesystem::path(ISCFLAT_SOURCE_DIR) / "scenarios";
}

std::vector<Scenario> corpus() { return load_corpus(default_corpus_dir()); }

BuiltApp build(const Scenario& sc) {
  BuiltApp b;
  try {
    b.original = vm::assemble_file(resolve(sc, sc.app), vm::mem::kAppCodeBase);
    b.cfg = cfg::extract_cfg(b.original);
    b.instrumented = cfg::instrument(b.original, b.cfg);
  } catch (const std::exception& e) {
    throw HarnessError(sc.name + ": app: " + e.what());
  }
  b.expected_h_app = secure::blake2s(b.instrumented.program.bytes());

  DeviceImage& img = b.image;
  const secure::Digest id = secure::blake2s(sc.name);
  std::copy_n(id.begin(), img.app_id.size(), img.app_id.begin());
  if (sc.instrument) {
    img.app = b.instrumented.program;
    img.addr_map = b.instrumented.addr_map;
  } else {
    img.app = b.original;
  }
  std::map<std::string, vm::Word> externals;
  for (const auto& [name, addr] : img.app.symbols) externals["app:" + name] = addr;
  for (std::size_t i = 0; i < sc.isrs.size(); ++i) {
    const vm::Word base = vm::mem::kOtherCodeBase + static_cast<vm::Word>(i) * kIsrStride;
    try {
      vm::Program isr = vm::assemble_file(resolve(sc, sc.isrs[i]), base, externals);
      isr.region = "other_code";
      if (isr.end() > base + kIsrStride) throw HarnessError("handler too large");
      img.isrs.push_back(std::move(isr));
    } catch (const std::exception& e) {
      throw HarnessError(sc.name + ": isr " + sc.isrs[i].string() + ": " + e.what());
    }
  }
  if (sc.isrs.size() * kIsrStride > vm::mem::kOtherCodeSize) {
    throw HarnessError(sc.name + ": too many handler files");
  }
  img.priority = sc.priority;
  img.schedule = sc.schedule;
  img.runtime.mode = sc.mode == Mode::Baseline ? secure::RuntimeMode::Baseline
                                               : secure::RuntimeMode::IscFlat;
  img.runtime.bind_output = sc.bind_output;
  return b;
}

std::vector<vm::Word> executed_app_path(const vm::Trace& trace,
                                        const vm::Program& deployed,
                                        const cfg::AddressMap& map) {
  std::vector<vm::Word> out;
  // Only thread context is the App's own execution; App instructions reached
  // from a handler are handler behavior.
  std::size_t depth = 0;
  for (const vm::TraceRecord& t : trace) {
    if (t.event == vm::TraceEvent::IrqEntry) ++depth;
    if (t.event == vm::TraceEvent::ExcReturn && depth > 0) --depth;
    if (depth > 0 || t.event != vm::TraceEvent::Retire || !deployed.contains(t.pc)) continue;
    if (map.empty()) {
      out.push_back(t.pc);
      continue;
    }
    const vm::Word orig = map.to_original(t.pc);
    if (map.is_original(orig) && map.map_address(orig) == t.pc) out.push_back(orig);
  }
  return out;
}

std::vector<vm::Word> logged_app_path(const std::vector<vm::Word>& log,
                                      const cfg::ControlFlowGraph& g) {
  std::vector<vm::Word> out;
  std::size_t i = 0;
  while (i < log.size()) {
    const auto id = g.node_starting_at(log[i]);
    if (!id) break;
    const cfg::CfgNode* n = &g.nodes[static_cast<std::size_t>(*id)];
    for (vm::Word a = n->start; a <= n->end; a += 4) out.push_back(a);
    i += cfg::has_branch(n->terminator) ? 2 : 1;
  }
  return out;
}

ScenarioResult run_scenario(const Scenario& sc, std::uint64_t seed) {
  BuiltApp b = build(sc);
  ScenarioResult res;
  res.name = sc.name;
  res.mode = sc.mode;
  res.expected = sc.expected;

  Rng rng(seed);
  secure::KeyPair keys = secure::KeyPair::generate(rng);
  const secure::PublicKey pk = keys.public_key();
  secure::Challenge chl{};
  rng.fill(chl);
  verify::NonceRegistry nonces;
  nonces.issue(chl);

  Device dev(b.image, std::move(keys));
  AttestOutcome run = dev.attest(chl, sc.max_steps, true);
  res.status = run.status;
  res.trace = std::move(run.trace);
  res.detail = run.detail;

  Outcome& act = res.actual;
  switch (run.status) {
    case AttestStatus::Faulted:
      act.kind = OutcomeKind::Fault;
      act.fault = run.fault->kind;
      break;
    case AttestStatus::Reported: {
      secure::Report rep = std::move(*run.report);
      if (sc.tamper == Tamper::ForgeSignature) {
        rep.sigma.assign(secure::kSignatureBytes, 0);
        rng.fill(rep.sigma);
      }
      // Reports reach the verifier as bytes.
      auto decoded = proto::decode_report(proto::encode_report(rep));
      if (auto* e = std::get_if<proto::DecodeError>(&decoded)) {
        throw HarnessError(sc.name + ": report codec failure: " +
                           std::string(proto::decode_error_name(*e)));
      }
      res.report = std::get<secure::Report>(std::move(decoded));
      const verify::VerificationPolicy policy{b.expected_h_app, b.cfg, pk, &nonces};
      res.verdict = verify::verify_report(*res.report, policy);
      if (res.verdict->outcome != verify::Outcome::Accept) {
        act.kind = OutcomeKind::Rejected;
        act.reason = res.verdict->outcome;
        res.detail = res.verdict->detail;
        break;
      }
      res.executed = executed_app_path(res.trace, b.image.app, b.image.addr_map);
      res.logged_path = logged_app_path(res.report->cflog, b.cfg);
      act.kind = res.executed == res.logged_path ? OutcomeKind::Accepted
                                                 : OutcomeKind::AcceptedButUnreliable;
      res.detail = act.kind == OutcomeKind::Accepted
                       ? "log matches the executed path"
                       : "log accepted but the executed path differs";
      break;
    }
    case AttestStatus::Busy:
    case AttestStatus::UnknownApp:
    case AttestStatus::Refused:
    case AttestStatus::Timeout:
      act.kind = OutcomeKind::NoReport;
      break;
  }

  res.passed = act == sc.expected;
  if (res.passed && sc.log_digest) {
    const bool match = res.report &&
                       secure::blake2s(secure::cflog_bytes(res.report->cflog)) ==
                           *sc.log_digest;
    if (!match) {
      res.passed = false;
      res.detail = "log digest differs from the expected one";
    }
  }
  return res;
}

}  // namespace iscflat::harness
