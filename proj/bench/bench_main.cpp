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


// Serial vs OpenMP batch kernels, plus raw simulator and verifier throughput.
// Results on a single-core host show the parallel path's scheduling cost
// rather than a speedup.

#include <benchmark/benchmark.h>

#include "iscflat/harness/batch.hpp"
#include "iscflat/harness/scenario.hpp"
#include "iscflat/verifier/verifier.hpp"
#include "iscflat/vm/assembler.hpp"

namespace {

using namespace iscflat;

harness::Exec exec_of(const benchmark::State& st) {
  return st.range(0) ? harness::Exec::Parallel : harness::Exec::Serial;
}

void BM_BenignEquivalence(benchmark::State& st) {
  for (auto _ : st) {
    auto items = harness::map_indices(
        64, [](std::size_t i) { return harness::benign_equivalence(1 + i); }, exec_of(st));
    benchmark::DoNotOptimize(items);
  }
  st.SetItemsProcessed(st.iterations() * 64);
}
BENCHMARK(BM_BenignEquivalence)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_OverheadCases(benchmark::State& st) {
  for (auto _ : st) {
    auto items = harness::map_indices(
        64, [](std::size_t i) { return harness::overhead_case(1 + i, static_cast<int>(i % 25)); },
        exec_of(st));
    benchmark::DoNotOptimize(items);
  }
  st.SetItemsProcessed(st.iterations() * 64);
}
BENCHMARK(BM_OverheadCases)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

// Instructions per second of the bare machine on a counting loop.
void BM_MachineStep(benchmark::State& st) {
  const vm::Program p = vm::assemble("main: ADD R0, #1\n B main\n", vm::mem::kAppCodeBase);
  std::uint64_t retired = 0;
  for (auto _ : st) {
    vm::MachineState s = vm::make_machine();
    vm::load_words(s, p.base, p.code);
    const auto r = vm::run(s, nullptr, 100'000, false);
    retired += r.steps;
  }
  st.SetItemsProcessed(static_cast<std::int64_t>(retired));
}
BENCHMARK(BM_MachineStep)->Unit(benchmark::kMicrosecond);

void BM_VerifyReport(benchmark::State& st) {
  const auto sc = harness::load_scenario(harness::default_corpus_dir() / "ex1-benign-iscflat.scn");
  const auto res = harness::run_scenario(sc);
  const auto built = harness::build(sc);
  if (!res.report) {
    st.SkipWithError("benign scenario produced no report");
    return;
  }
  Rng rng(1);
  const auto keys = secure::KeyPair::generate(rng);
  secure::Report rep = *res.report;
  rep.sigma = keys.sign(secure::signed_message(rep));
  for (auto _ : st) {
    verify::NonceRegistry nonces;
    nonces.issue(rep.chl);
    benchmark::DoNotOptimize(
        verify::verify_report(rep, {built.expected_h_app, built.cfg, keys.public_key(), &nonces}));
  }
}
BENCHMARK(BM_VerifyReport)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
