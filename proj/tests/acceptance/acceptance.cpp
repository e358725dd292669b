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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Thresholds and runtime limits are fixed here;
// nothing is tuned at run time.

#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <algorithm>
#include <functional>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "../oracles/path_oracle.hpp"
#include "iscflat/cfg/cfg.hpp"
#include "iscflat/cfg/instrument.hpp"
#include "iscflat/harness/device.hpp"
#include "iscflat/harness/batch.hpp"
#include "iscflat/harness/overhead.hpp"
#include "iscflat/harness/scenario.hpp"
#include "iscflat/protocol/session.hpp"
#include "iscflat/protocol/wire.hpp"
#include "iscflat/secure/crypto.hpp"
#include "iscflat/secure/report.hpp"
#include "iscflat/verifier/verifier.hpp"
#include "iscflat/vm/assembler.hpp"

#ifndef ISCFLAT_SOURCE_DIR
#error "ISCFLAT_SOURCE_DIR must be defined"
#endif
#ifndef ISCFLAT_CLI
#error "ISCFLAT_CLI must name the built command-line tool"
#endif

namespace {

using namespace iscflat;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Check {
  bool ok = false;
  std::string detail;
};

const fs::path kSource = ISCFLAT_SOURCE_DIR;

harness::Scenario scenario(const std::string& name) {
  return harness::load_scenario(kSource / "scenarios" / (name + ".scn"));
}

// ---------------------------------------------------------------- 1
// Six-node walk. Records: N1 = 0x8000..0x8008, N3 = 0x800C..0x8010,
// N2 = 0x8014..0x8018, N5 = 0x801C..0x8020, N6 = 0x8024..0x8028,
// N4 = 0x802C..0x8030; the top-level return logs the exit address.
Check six_node_walk() {
  const vm::Program p = vm::assemble_file(kSource / "programs/six_node_app.s", vm::mem::kAppCodeBase);
  const cfg::ControlFlowGraph g = cfg::extract_cfg(p);
  const std::vector<vm::Word> valid = {0x8000, 0x8008, 0x800C, 0x8010,
                                       0x8024, 0x8028, 0x802C, 0x200C};
  // N1 N3 N6 N2 N5 N4: N6 -> N2 is illegal; A2 entry is record 6.
  const std::vector<vm::Word> invalid = {0x8000, 0x8008, 0x800C, 0x8010, 0x8024, 0x8028,
                                         0x8014, 0x8018, 0x801C, 0x8020, 0x802C, 0x200C};
  Rng rng(1);
  const secure::KeyPair keys = secure::KeyPair::generate(rng);
  const secure::Digest h = secure::blake2s(std::string_view{"six-node"});
  const auto judge = [&](const std::vector<vm::Word>& log) {
    secure::Report r;
    r.cflog = log;
    r.h_app = h;
    rng.fill(r.chl);
    r.sigma = keys.sign(secure::signed_message(r));
    verify::NonceRegistry nonces;
    nonces.issue(r.chl);
    return verify::verify_report(r, {h, g, keys.public_key(), &nonces});
  };
  // The device must also produce exactly the valid log on this App.
  harness::Scenario sc;
  sc.name = "six-node";
  sc.app = kSource / "programs/six_node_app.s";
  const auto built = harness::build(sc);
  Rng krng(2);
  harness::Device dev(built.image, secure::KeyPair::generate(krng));
  secure::Challenge chl{};
  const auto out = dev.attest(chl, 10000, false);

  const auto v1 = judge(valid);
  const auto v2 = judge(invalid);
  Check c;
  c.ok = g.nodes.size() == 6 && out.report && out.report->cflog == valid &&
         v1.outcome == verify::Outcome::Accept &&
         v2.outcome == verify::Outcome::RejectControlFlow && v2.violation_index == 6u;
  c.detail = "device log " + std::string(out.report && out.report->cflog == valid ? "matches" : "differs") +
             "; valid " + std::string(verify::outcome_name(v1.outcome)) + ", invalid " +
             std::string(verify::outcome_name(v2.outcome)) + " at record " +
             (v2.violation_index ? std::to_string(*v2.violation_index) : "-") + " (want 6)";
  return c;
}

// ---------------------------------------------------------------- 2
Check baseline_unreliability() {
  const auto benign = harness::run_scenario(scenario("ex1-benign-baseline"));
  if (!benign.report) return {false, "benign baseline run produced no report"};
  const secure::Bytes ref = secure::cflog_bytes(benign.report->cflog);
  Check c{true, "EX1 log " + std::to_string(ref.size()) + " bytes"};
  for (const char* name : {"ex2-retaddr-baseline", "ex3-gadget-baseline"}) {
    const auto r = harness::run_scenario(scenario(name));
    const bool same_log = r.report && secure::cflog_bytes(r.report->cflog) == ref;
    const bool accepted = r.verdict && r.verdict->outcome == verify::Outcome::Accept;
    const bool differs = r.executed != benign.executed;
    c.ok = c.ok && same_log && accepted && differs;
    c.detail += std::string("; ") + name + ": log " + (same_log ? "identical" : "DIFFERENT") +
                ", verdict " + (r.verdict ? std::string(verify::outcome_name(r.verdict->outcome)) : "none") +
                ", executed path " + (differs ? "differs" : "SAME");
  }
  return c;
}

// ---------------------------------------------------------------- 3
Check protected_soundness() {
  int attacks = 0, accepted = 0, benign_ok = 0, benign = 0;
  std::string bad;
  for (const auto& sc : harness::corpus()) {
    if (sc.mode != harness::Mode::IscFlat) continue;
    const auto r = harness::run_scenario(sc);
    const bool acc = r.actual.kind == harness::OutcomeKind::Accepted ||
                     r.actual.kind == harness::OutcomeKind::AcceptedButUnreliable;
    if (sc.expected.kind == harness::OutcomeKind::Accepted) {
      ++benign;
      if (r.actual.kind == harness::OutcomeKind::Accepted) ++benign_ok;
      continue;
    }
    ++attacks;
    if (acc) {
      ++accepted;
      bad += " " + sc.name;
    }
  }
  Check c;
  c.ok = attacks >= 9 && accepted == 0 && benign >= 1 && benign_ok == benign;
  c.detail = std::to_string(attacks) + " attack scenarios, " + std::to_string(accepted) +
             " accepted" + bad + "; benign accepted " + std::to_string(benign_ok) + "/" +
             std::to_string(benign);
  return c;
}

// ---------------------------------------------------------------- 4
Check benign_equivalence() {
  constexpr std::size_t kN = 100;
  const auto items = harness::map_indices(
      kN, [](std::size_t i) { return harness::benign_equivalence(1000 + i); }, harness::Exec::Parallel);
  std::size_t holds = 0, interrupted = 0, irqs = 0;
  std::string first_bad;
  for (const auto& it : items) {
    if (it.holds()) {
      ++holds;
    } else if (first_bad.empty()) {
      first_bad = " first failure seed " + std::to_string(it.seed) + " " + it.error;
    }
    if (it.interrupts_taken > 0) ++interrupted;
    irqs += it.interrupts_taken;
  }
  Check c;
  c.ok = holds == kN && interrupted == kN;
  c.detail = std::to_string(holds) + "/" + std::to_string(kN) + " logs equal, " +
             std::to_string(interrupted) + "/" + std::to_string(kN) + " runs interrupted (" +
             std::to_string(irqs) + " interrupts)" + first_bad;
  return c;
}

// ---------------------------------------------------------------- 5
Check tamper_rejection() {
  constexpr std::size_t kFlips = 2000;
  const auto sc = scenario("ex1-benign-iscflat");
  const auto built = harness::build(sc);
  // Reports from a few benign runs with different keys and challenges.
  std::vector<std::tuple<secure::Bytes, secure::Challenge, secure::PublicKey>> reports;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    Rng rng(seed);
    secure::KeyPair keys = secure::KeyPair::generate(rng);
    const secure::PublicKey pk = keys.public_key();
    harness::Device dev(built.image, std::move(keys));
    secure::Challenge chl{};
    rng.fill(chl);
    const auto out = dev.attest(chl, 100000, false);
    if (!out.report) return {false, "benign run produced no report"};
    reports.emplace_back(proto::encode_report(*out.report), chl, pk);
  }
  Rng pick(99);
  std::size_t rejected = 0, decode_errors = 0;
  for (std::size_t k = 0; k < kFlips; ++k) {
    const auto& [wire, chl, pk] = reports[k % reports.size()];
    const std::size_t bit = pick.below(8 * wire.size());
    const auto item = harness::verify_flipped(wire, bit, chl, built.expected_h_app, built.cfg, pk);
    if (item.rejected()) ++rejected;
    if (!item.decoded) ++decode_errors;
  }
  // Control: the unflipped reports verify.
  std::size_t clean = 0;
  for (const auto& [wire, chl, pk] : reports) {
    verify::NonceRegistry nonces;
    nonces.issue(chl);
    const auto rep = std::get<secure::Report>(proto::decode_report(wire));
    if (verify::verify_report(rep, {built.expected_h_app, built.cfg, pk, &nonces}).outcome ==
        verify::Outcome::Accept) {
      ++clean;
    }
  }
  Check c;
  c.ok = rejected == kFlips && clean == reports.size();
  c.detail = std::to_string(rejected) + "/" + std::to_string(kFlips) + " flipped reports rejected (" +
             std::to_string(decode_errors) + " at decode); " + std::to_string(clean) + "/" +
             std::to_string(reports.size()) + " unflipped accepted";
  return c;
}

// ---------------------------------------------------------------- 6
// Synthetic CFGs built the way the extractor builds them: contiguous nodes,
// return edges to every call's return site, indirect edges to one shared
// address-taken set.
cfg::ControlFlowGraph random_cfg(Rng& rng) {
  using cfg::EdgeKind;
  using cfg::Terminator;
  cfg::ControlFlowGraph g;
  const int n = 1 + static_cast<int>(rng.below(6));
  vm::Word at = vm::mem::kAppCodeBase;
  for (int i = 0; i < n; ++i) {
    cfg::CfgNode node;
    node.id = i;
    node.start = at;
    node.end = at + 4 * static_cast<vm::Word>(rng.below(3));
    node.terminator = static_cast<Terminator>(rng.below(7));
    at = node.end + 4;
    g.nodes.push_back(node);
  }
  g.entry = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  std::vector<int> taken;
  for (int i = 0; i < n; ++i) {
    if (rng.below(3) == 0) taken.push_back(i);
  }
  std::vector<int> sites;
  for (int i = 0; i + 1 < n; ++i) {
    if (cfg::is_call(g.nodes[static_cast<std::size_t>(i)].terminator)) sites.push_back(i + 1);
  }
  const auto add = [&](int from, int to, EdgeKind k) {
    const cfg::CfgEdge e{from, to, k};
    if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end()) g.edges.push_back(e);
  };
  const auto any = [&] { return static_cast<int>(rng.below(static_cast<std::uint64_t>(n))); };
  for (int i = 0; i < n; ++i) {
    const bool has_next = i + 1 < n;
    switch (g.nodes[static_cast<std::size_t>(i)].terminator) {
      case Terminator::Direct: add(i, any(), EdgeKind::Taken); break;
      case Terminator::Conditional:
        add(i, any(), EdgeKind::Taken);
        if (has_next) add(i, i + 1, EdgeKind::Fallthrough);
        break;
      case Terminator::DirectCall: add(i, any(), EdgeKind::Call); break;
      case Terminator::Indirect:
        for (int t : taken) add(i, t, EdgeKind::Taken);
        break;
      case Terminator::IndirectCall:
        for (int t : taken) add(i, t, EdgeKind::Call);
        break;
      case Terminator::Return:
        for (int t : sites) add(i, t, EdgeKind::Return);
        break;
      case Terminator::FallthroughToHalt:
        if (has_next && rng.below(2)) add(i, i + 1, EdgeKind::Fallthrough);
        break;
    }
  }
  return g;
}

std::vector<vm::Word> random_log(Rng& rng, const cfg::ControlFlowGraph& g,
                                 const std::vector<oracle::Log>& producible) {
  std::vector<vm::Word> alphabet = {g.exit_address, 0x7FFC};
  for (const auto& node : g.nodes) {
    alphabet.push_back(node.start);
    alphabet.push_back(node.end);
    alphabet.push_back(node.end + 4);
  }
  const auto sym = [&] { return alphabet[rng.below(alphabet.size())]; };
  std::vector<vm::Word> log;
  const auto mode = rng.below(4);
  if (mode == 0 || producible.empty()) {
    const auto len = rng.below(13);
    for (std::uint64_t i = 0; i < len; ++i) log.push_back(sym());
    return log;
  }
  log = producible[rng.below(producible.size())];
  if (mode == 1) return log;  // producible as is
  if (mode == 2 && !log.empty()) {
    log[rng.below(log.size())] = sym();
  } else if (!log.empty()) {
    log.resize(rng.below(log.size()));
  }
  return log;
}

Check oracle_equivalence() {
  constexpr int kLogs = 1000;
  Rng rng(6);
  int checked = 0, mismatched = 0, accepts = 0, returns = 0;
  std::string first;
  while (checked < kLogs) {
    const auto g = random_cfg(rng);
    const oracle::PathOracle oracle(g);
    std::vector<oracle::Log> producible;
    // Stack-free paths include logs that pass the walk but return to the
    // wrong site, which is what exercises the shadow stack.
    for (const bool with_stack : {true, false}) {
      for (auto& l : oracle.enumerate(6, with_stack)) {
        if (l.size() <= 12) producible.push_back(std::move(l));
      }
    }
    for (int k = 0; k < 10 && checked < kLogs; ++k, ++checked) {
      const auto log = random_log(rng, g, producible);
      const auto walk = verify::walk_cflog(log, g);
      const auto shadow = walk ? std::nullopt : verify::shadow_stack_check(log, g);
      verify::Outcome got = verify::Outcome::Accept;
      std::optional<std::size_t> at;
      if (walk) {
        got = verify::Outcome::RejectControlFlow;
        at = walk->index;
      } else if (shadow) {
        got = verify::Outcome::RejectReturn;
        at = shadow->index;
      }
      const auto want = oracle.judge(log);
      const bool same = got == want.outcome && (got == verify::Outcome::Accept || at == want.index);
      if (!same) {
        ++mismatched;
        if (first.empty()) {
          std::ostringstream os;
          os << " first mismatch: got " << verify::outcome_name(got) << "@" << (at ? *at : 0)
             << ", oracle " << verify::outcome_name(want.outcome) << "@" << want.index.value_or(0);
          first = os.str();
        }
      }
      if (want.outcome == verify::Outcome::Accept) ++accepts;
      if (want.outcome == verify::Outcome::RejectReturn) ++returns;
    }
  }
  Check c;
  c.ok = mismatched == 0 && checked >= 500 && accepts > 0 && returns > 0;
  c.detail = std::to_string(checked - mismatched) + "/" + std::to_string(checked) +
             " verdicts and violation indices match (" + std::to_string(accepts) + " accept, " +
             std::to_string(returns) + " return-violation)" + first;
  return c;
}

// ---------------------------------------------------------------- 7
Check overhead_constants() {
  constexpr std::size_t kCases = 150;
  const auto items = harness::map_indices(
      kCases,
      [](std::size_t i) { return harness::overhead_case(500 + i, static_cast<int>(i % 25)); },
      harness::Exec::Parallel);
  harness::OverheadSamples all;
  std::vector<std::uint64_t> dispatch_total;
  std::set<int> isr_lengths;
  for (const auto& it : items) {
    if (!it.error.empty()) return {false, "seed " + std::to_string(it.seed) + ": " + it.error};
    all.append(it.samples);
    for (std::size_t k = 0; k < it.samples.dispatcher_entry.size(); ++k) {
      dispatch_total.push_back(it.samples.dispatcher_entry[k] + it.samples.dispatcher_exit[k]);
    }
    isr_lengths.insert(it.isr_len);
  }
  const auto eg = harness::summarize(all.entry_gate);
  const auto dg = harness::summarize(all.dest_gate);
  const auto dt = harness::summarize(dispatch_total);
  Check c;
  c.ok = eg.n >= 100 && dg.n >= 100 && dt.n >= 100 && eg.variance == 0 && dg.variance == 0 &&
         dt.variance == 0 && isr_lengths.size() >= 20;
  std::ostringstream os;
  os << "entry gate k=" << eg.min << " (n=" << eg.n << ", var " << eg.variance << "), dest gate k="
     << dg.min << " (n=" << dg.n << ", var " << dg.variance << "), dispatcher entry+exit="
     << dt.min << " (n=" << dt.n << ", var " << dt.variance << ") over " << isr_lengths.size()
     << " ISR lengths";
  c.detail = os.str();
  return c;
}

// ---------------------------------------------------------------- 8
struct ProverProcess {
  pid_t pid = -1;
  ~ProverProcess() {
    if (pid > 0) {
      ::kill(pid, SIGTERM);
      int status = 0;
      ::waitpid(pid, &status, 0);
    }
  }
};

Check protocol_round_trip() {
  const fs::path dir = fs::temp_directory_path() / ("iscflat-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = ISCFLAT_CLI;
  const std::string keygen = "'" + cli + "' --seed 8 keygen --force --out '" + (dir / "dev").string() + "' >/dev/null";
  if (std::system(keygen.c_str()) != 0) return {false, "keygen failed"};
  const secure::PublicKey pk = secure::load_public_key(dir / "dev.pk");

  const fs::path benign_scn = kSource / "scenarios/ex1-benign-iscflat.scn";
  const fs::path slow_scn = kSource / "scenarios/no-return-iscflat.scn";
  const fs::path port_file = dir / "port";
  ProverProcess prover;
  prover.pid = ::fork();
  if (prover.pid == 0) {
    const std::string key = (dir / "dev.sk").string();
    const std::string pf = port_file.string();
    const std::string a = benign_scn.string(), b = slow_scn.string();
    if (!std::freopen("/dev/null", "w", stdout) || !std::freopen("/dev/null", "w", stderr)) {
      std::_Exit(126);
    }
    ::execl(cli.c_str(), cli.c_str(), "prove", "--scenario", a.c_str(), "--scenario", b.c_str(),
            "--key", key.c_str(), "--listen", "127.0.0.1:0", "--ips", "20000",
            "--max-instructions", "30000", "--port-file", pf.c_str(), static_cast<char*>(nullptr));
    std::_Exit(127);
  }
  std::string port;
  for (int i = 0; i < 200 && port.empty(); ++i) {
    std::this_thread::sleep_for(25ms);
    std::ifstream in(port_file);
    std::getline(in, port);
  }
  if (port.empty()) return {false, "prover did not start"};
  const proto::Endpoint ep = proto::parse_endpoint("127.0.0.1:" + port);

  const auto benign = harness::build(harness::load_scenario(benign_scn));
  const auto slow = harness::build(harness::load_scenario(slow_scn));
  verify::NonceRegistry nonces;
  const verify::VerificationPolicy policy{benign.expected_h_app, benign.cfg, pk, &nonces};
  Rng rng(21);

  // (a) benign session.
  const auto s1 = proto::verifier_request(ep, policy, benign.image.app_id, rng, 5000ms);
  if (!s1.report) return {false, "benign session got " + s1.outcome()};

  // (b) the recorded report replayed into a fresh session.
  std::uint16_t rport = 0;
  proto::Socket listener = proto::listen_tcp({"127.0.0.1", 0}, rport);
  auto replayer = std::async(std::launch::async, [&] {
    proto::Socket conn(::accept(listener.fd(), nullptr, nullptr));
    (void)proto::read_frame(conn, 5000ms);
    proto::write_frame(conn, {proto::FrameType::Report, s1.report_bytes}, 5000ms);
  });
  const auto s2 = proto::verifier_request({"127.0.0.1", rport}, policy, benign.image.app_id, rng, 5000ms);
  replayer.get();

  // (c) a second session while a long one runs.
  verify::NonceRegistry slow_nonces;
  const verify::VerificationPolicy slow_policy{slow.expected_h_app, slow.cfg, pk, &slow_nonces};
  auto long_run = std::async(std::launch::async, [&] {
    Rng r(22);
    return proto::verifier_request(ep, slow_policy, slow.image.app_id, r, 8000ms);
  });
  std::this_thread::sleep_for(300ms);
  const auto s3 = proto::verifier_request(ep, policy, benign.image.app_id, rng, 5000ms);
  const auto s4 = long_run.get();

  // (d) the device is free again afterwards.
  const auto s5 = proto::verifier_request(ep, policy, benign.image.app_id, rng, 5000ms);
  fs::remove_all(dir);

  Check c;
  c.ok = s1.outcome() == "Accept" && s2.outcome() == "RejectStale" && s3.outcome() == "Busy" &&
         s4.outcome() == "NoReport" && s5.outcome() == "Accept";
  c.detail = "benign " + s1.outcome() + ", replay " + s2.outcome() + ", concurrent " + s3.outcome() +
             " (long session " + s4.outcome() + "), after " + s5.outcome();
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "six-node CFG walk", 1, six_node_walk},
      {2, "baseline logs hide attacks", 5, baseline_unreliability},
      {3, "protected-mode soundness", 10, protected_soundness},
      {4, "benign interrupt equivalence", 60, benign_equivalence},
      {5, "report tamper rejection", 30, tamper_rejection},
      {6, "shadow-stack oracle equivalence", 60, oracle_equivalence},
      {7, "constant per-event overhead", 30, overhead_constants},
      {8, "protocol round trip", 10, protocol_round_trip},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = Clock::now();
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    const bool in_time = secs <= cr.limit_s;
    const bool pass = c.ok && in_time;
    if (!pass) ++failed;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2f s of %.0f s%s", secs, cr.limit_s, in_time ? "" : " EXCEEDED");
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << cr.id << " " << cr.name << ": " << c.detail
              << " [" << timing << "]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
