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

#include "iscflat/harness/batch.hpp"

#include <algorithm>

#include "iscflat/protocol/wire.hpp"
#include "iscflat/vm/assembler.hpp"

namespace iscflat::harness {

namespace {

constexpr int kIrqLow = 3;
constexpr int kIrqHigh = 5;

secure::KeyPair case_keys(std::uint64_t seed) {
  Rng rng(seed ^ 0x9E3779B97F4A7C15ull);
  return secure::KeyPair::generate(rng);
}

}  // namespace

GeneratedCase generate_case(std::uint64_t seed, const GenOptions& opt,
                            int isr_len) {
  Rng rng(seed);
  GeneratedCase c;
  c.seed = seed;
  const GeneratedApp app = generate_app(rng, opt);
  c.original = vm::assemble(app.source, vm::mem::kAppCodeBase);
  c.cfg = cfg::extract_cfg(c.original);
  c.instrumented = cfg::instrument(c.original, c.cfg);
  c.isr_len = isr_len >= 0 ? isr_len : static_cast<int>(rng.below(
                                           static_cast<std::uint64_t>(opt.max_isr_len) + 1));
  const std::string isrs =
      generate_isr(rng, kIrqLow, c.isr_len, "isr_low") +
      generate_isr(rng, kIrqHigh, c.isr_len, "isr_high");
  c.isrs = vm::assemble(isrs, vm::mem::kOtherCodeBase);
  c.isrs.region = "other_code";
  return c;
}

CaseRun run_case(const GeneratedCase& c,
                 const std::vector<std::pair<std::uint64_t, int>>& schedule,
                 secure::RuntimeMode mode, bool record_trace,
                 std::uint64_t max_steps) {
  DeviceImage img;
  img.app_id[0] = 1;
  img.app = c.instrumented.program;
  img.addr_map = c.instrumented.addr_map;
  img.isrs = {c.isrs};
  img.priority = {{kIrqLow, 8}, {kIrqHigh, 4}};
  img.schedule = schedule;
  img.runtime.mode = mode;

  secure::KeyPair keys = case_keys(c.seed);
  const secure::PublicKey pk = keys.public_key();
  Device dev(img, std::move(keys));
  secure::Challenge chl{};
  Rng rng(c.seed + schedule.size());
  rng.fill(chl);

  CaseRun r;
  r.outcome = dev.attest(chl, max_steps, true);
  for (const auto& t : r.outcome.trace) {
    if (t.event == vm::TraceEvent::IrqEntry) ++r.interrupts_taken;
  }
  if (!record_trace) r.outcome.trace.clear();
  if (r.outcome.report) {
    verify::NonceRegistry nonces;
    nonces.issue(chl);
    const verify::VerificationPolicy policy{
        secure::blake2s(c.instrumented.program.bytes()), c.cfg, pk, &nonces};
    r.verdict = verify::verify_report(*r.outcome.report, policy);
  }
  return r;
}

EquivalenceItem benign_equivalence(std::uint64_t seed) {
  EquivalenceItem item;
  item.seed = seed;
  try {
    const GeneratedCase c = generate_case(seed);
    const CaseRun plain = run_case(c, {}, secure::RuntimeMode::IscFlat, false);
    if (!plain.outcome.report) {
      item.error = "no report without interrupts: " + plain.outcome.detail;
      return item;
    }
    item.plain_log = plain.outcome.report->cflog;
    item.plain_accepted = plain.verdict->outcome == verify::Outcome::Accept;

    // Fire points strictly inside the App's run.
    Rng rng(seed * 31 + 7);
    const std::uint64_t len = std::max<std::uint64_t>(plain.outcome.steps, 3);
    std::vector<std::uint64_t> at;
    const auto k = 1 + rng.below(3);
    for (std::uint64_t i = 0; i < k; ++i) at.push_back(1 + rng.below(len - 2));
    std::sort(at.begin(), at.end());
    at.erase(std::unique(at.begin(), at.end()), at.end());
    std::vector<std::pair<std::uint64_t, int>> schedule;
    for (auto a : at) schedule.emplace_back(a, rng.below(2) ? kIrqHigh : kIrqLow);

    const CaseRun irq = run_case(c, schedule, secure::RuntimeMode::IscFlat, false);
    item.interrupts_taken = irq.interrupts_taken;
    if (!irq.outcome.report) {
      item.error = "no report with interrupts: " + irq.outcome.detail;
      return item;
    }
    item.irq_log = irq.outcome.report->cflog;
    item.irq_accepted = irq.verdict->outcome == verify::Outcome::Accept;
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

OverheadItem overhead_case(std::uint64_t seed, int isr_len) {
  OverheadItem item;
  item.seed = seed;
  item.isr_len = isr_len;
  try {
    const GeneratedCase c = generate_case(seed, {}, isr_len);
    // One interrupt early in the run, one later; both land in App code.
    const std::vector<std::pair<std::uint64_t, int>> schedule = {{3, kIrqLow},
                                                                 {9, kIrqHigh}};
    const CaseRun r = run_case(c, schedule, secure::RuntimeMode::IscFlat, true);
    if (r.outcome.status != AttestStatus::Reported) {
      item.error = r.outcome.detail;
      return item;
    }
    item.samples = measure_overhead(r.outcome.trace, c.instrumented.program,
                                    c.instrumented.addr_map);

    GeneratedCase plain = c;
    plain.instrumented.program = c.original;
    plain.instrumented.addr_map = {};
    const CaseRun b = run_case(plain, schedule, secure::RuntimeMode::Baseline, true);
    item.baseline_retired = b.outcome.steps;
  } catch (const std::exception& e) {
    item.error = e.what();
  }
  return item;
}

TamperItem verify_flipped(const secure::Bytes& wire, std::size_t bit,
                          const secure::Challenge& chl,
                          const secure::Digest& expected_h_app,
                          const cfg::ControlFlowGraph& g,
                          const secure::PublicKey& pk) {
  TamperItem item;
  item.bit = bit;
  secure::Bytes flipped = wire;
  flipped.at(bit / 8) ^= static_cast<std::uint8_t>(1u << (bit % 8));
  auto decoded = proto::decode_report(flipped);
  if (auto* e = std::get_if<proto::DecodeError>(&decoded)) {
    item.decode_error = proto::decode_error_name(*e);
    return item;
  }
  item.decoded = true;
  verify::NonceRegistry nonces;
  nonces.issue(chl);
  const verify::VerificationPolicy policy{expected_h_app, g, pk, &nonces};
  item.outcome = verify::verify_report(std::get<secure::Report>(decoded), policy).outcome;
  return item;
}

}  // namespace iscflat::harness
