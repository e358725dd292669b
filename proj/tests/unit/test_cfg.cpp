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


#include <gtest/gtest.h>

#include <sstream>

#include "iscflat/cfg/cfg.hpp"
#include "iscflat/cfg/instrument.hpp"
#include "iscflat/harness/batch.hpp"
#include "iscflat/util/errors.hpp"
#include "test_support.hpp"

namespace {

using namespace iscflat;
using namespace iscflat::cfg;
using vm::Word;

TEST(Cfg, SixNodeExampleHasExpectedTopology) {
  const auto g = extract_cfg(testing_support::load_app("six_node_app.s"));
  ASSERT_EQ(g.nodes.size(), 6u);
  ASSERT_EQ(g.edges.size(), 6u);
  EXPECT_EQ(g.entry, 0);
  EXPECT_EQ(g.exit_address, vm::mem::kFinalizeGate);
  // Ids follow address order: N1=0 N3=1 N2=2 N5=3 N6=4 N4=5.
  const std::vector<CfgNode> want = {
      {0, 0x8000, 0x8008, Terminator::Conditional},
      {1, 0x800C, 0x8010, Terminator::Direct},
      {2, 0x8014, 0x8018, Terminator::Direct},
      {3, 0x801C, 0x8020, Terminator::Direct},
      {4, 0x8024, 0x8028, Terminator::Direct},
      {5, 0x802C, 0x8030, Terminator::Return},
  };
  EXPECT_EQ(g.nodes, want);
  EXPECT_TRUE(g.has_edge(0, 2, EdgeKind::Taken));
  EXPECT_TRUE(g.has_edge(0, 1, EdgeKind::Fallthrough));
  EXPECT_TRUE(g.has_edge(2, 3));
  EXPECT_TRUE(g.has_edge(1, 4));
  EXPECT_TRUE(g.has_edge(3, 5));
  EXPECT_TRUE(g.has_edge(4, 5));
  EXPECT_FALSE(g.has_edge(5, 0));
  EXPECT_EQ(g.node_containing(0x8004), 0);
  EXPECT_EQ(g.node_starting_at(0x8004), std::nullopt);
}

TEST(Cfg, StraightLineProgramIsOneNode) {
  const auto p = testing_support::load_app("straight.s");
  const auto g = extract_cfg(p);
  ASSERT_EQ(g.nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.nodes[0].terminator, Terminator::FallthroughToHalt);
  EXPECT_EQ(instrument(p, g).inserted, 1u);
}

TEST(Cfg, DirectTargetOutsideImageIsRejected) {
  const auto p = vm::assemble("B 0x9000\n", vm::mem::kAppCodeBase);
  EXPECT_THROW(extract_cfg(p), MalformedProgram);
}

TEST(Cfg, TextFormatRoundTrips) {
  for (const char* name : {"six_node_app.s", "two_task_app.s", "fp_app.s", "straight.s"}) {
    const auto g = extract_cfg(testing_support::load_app(name));
    std::stringstream ss;
    write_cfg(ss, g);
    EXPECT_EQ(read_cfg(ss), g) << name;
  }
}

TEST(Cfg, ReadRejectsInconsistentText) {
  const std::vector<std::string> bad = {
      "",
      "cfg v2\n",
      "cfg v1\nentry 0\nexit 0x200c\nnode 1 0x8000 0x8000 Return\n",
      "cfg v1\nentry 0\nexit 0x200c\nnode 0 0x8000 0x8000 Sideways\n",
      "cfg v1\nentry 0\nexit 0x200c\nnode 0 0x8000 0x8000 Return\nedge 0 3 Taken\n",
      "cfg v1\nentry 4\nexit 0x200c\nnode 0 0x8000 0x8000 Return\n",
  };
  for (const auto& text : bad) {
    std::istringstream is(text);
    EXPECT_THROW(read_cfg(is), MalformedProgram) << text;
  }
}

TEST(Instrument, SixNodeExampleGateCount) {
  const auto p = testing_support::load_app("six_node_app.s");
  const auto ip = instrument(p, extract_cfg(p));
  // One entry gate per node, a second per direct/conditional terminator,
  // and a PUSH + dest gate for the return.
  EXPECT_EQ(ip.inserted, 6u + 5u + 2u);
  EXPECT_EQ(ip.program.code.size(), p.code.size() + ip.inserted);
  EXPECT_EQ(ip.program.entry, ip.addr_map.map_target(p.entry));
}

TEST(Instrument, StripInvertsInstrument) {
  for (const char* name : {"six_node_app.s", "two_task_app.s", "fp_app.s", "straight.s"}) {
    const auto p = testing_support::load_app(name);
    EXPECT_EQ(strip(instrument(p, extract_cfg(p))), p) << name;
  }
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto c = harness::generate_case(seed);
    EXPECT_EQ(strip(c.instrumented), c.original) << "seed " << seed;
  }
}

TEST(Instrument, AddressMapRejectsUnknownAddresses) {
  const auto p = testing_support::load_app("six_node_app.s");
  const auto ip = instrument(p, extract_cfg(p));
  EXPECT_THROW(ip.addr_map.map_address(0x8002), UnknownAddress);
  EXPECT_THROW(ip.addr_map.map_address(p.end()), UnknownAddress);
  EXPECT_THROW(ip.addr_map.map_target(0x7FFC), UnknownAddress);
  for (Word a = p.base; a < p.end(); a += 4) {
    const Word r = ip.addr_map.map_address(a);
    EXPECT_EQ(ip.addr_map.to_original(r), a);
    EXPECT_EQ(ip.program.word_at(r) >> 27, p.word_at(a) >> 27);
    EXPECT_LE(ip.addr_map.map_target(a), r);
  }
}

// Original instructions retired by the App in thread context, expressed as
// original addresses.
std::vector<Word> original_path(const vm::Trace& t, const cfg::AddressMap& map,
                                const vm::Program& app) {
  std::vector<Word> out;
  int depth = 0;
  for (const auto& r : t) {
    if (r.event == vm::TraceEvent::IrqEntry) ++depth;
    if (r.event == vm::TraceEvent::ExcReturn) --depth;
    if (r.event != vm::TraceEvent::Retire || depth != 0) continue;
    if (r.pc < app.base || r.pc >= app.end()) continue;
    if (map.empty()) {
      out.push_back(r.pc);
      continue;
    }
    const Word o = map.to_original(r.pc);
    if (map.is_original(o) && map.map_address(o) == r.pc) out.push_back(o);
  }
  return out;
}

TEST(Instrument, PreservesExecutedOriginalPath) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const auto c = harness::generate_case(seed);
    const auto inst = harness::run_case(c, {}, secure::RuntimeMode::IscFlat, true);
    ASSERT_EQ(inst.outcome.status, harness::AttestStatus::Reported) << inst.outcome.detail;

    auto plain = c;
    plain.instrumented.program = c.original;
    plain.instrumented.addr_map = {};
    const auto base = harness::run_case(plain, {}, secure::RuntimeMode::Baseline, true);
    ASSERT_EQ(base.outcome.status, harness::AttestStatus::Reported) << base.outcome.detail;

    const auto a = original_path(inst.outcome.trace, c.instrumented.addr_map, c.instrumented.program);
    const auto b = original_path(base.outcome.trace, {}, c.original);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b) << "seed " << seed;
  }
}

}  // namespace
