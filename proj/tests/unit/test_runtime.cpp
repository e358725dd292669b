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

#include "../oracles/blake2s_ref.hpp"
#include "iscflat/cfg/cfg.hpp"
#include "iscflat/cfg/instrument.hpp"
#include "iscflat/harness/device.hpp"
#include "iscflat/secure/runtime.hpp"
#include "test_support.hpp"

namespace {

using namespace iscflat;
using namespace iscflat::secure;
namespace mem = vm::mem;
using harness::AttestStatus;
using harness::Device;
using harness::DeviceImage;

KeyPair test_keys(std::uint64_t seed = 1) {
  Rng rng(seed);
  return KeyPair::generate(rng);
}

DeviceImage image_for(const std::string& app, const std::vector<std::string>& isrs = {},
                      RuntimeConfig rc = {}) {
  DeviceImage img;
  img.app_id[0] = 7;
  const vm::Program p = testing_support::load_app(app);
  const auto ip = cfg::instrument(p, cfg::extract_cfg(p));
  img.app = ip.program;
  img.addr_map = ip.addr_map;
  vm::Word at = mem::kOtherCodeBase;
  for (const auto& name : isrs) {
    vm::Program isr = vm::assemble_file(testing_support::program_path(name), at);
    at += 0x800;
    img.isrs.push_back(isr);
  }
  img.runtime = rc;
  return img;
}

Challenge chl_of(std::uint8_t b) {
  Challenge c{};
  c.fill(b);
  return c;
}

TEST(Runtime, SixNodeExampleProducesTheExpectedLog) {
  Device dev(image_for("six_node_app.s"), test_keys());
  const auto out = dev.attest(chl_of(1), 10000);
  ASSERT_EQ(out.status, AttestStatus::Reported) << out.detail;
  // N1 entry, BEQ; N3 entry, B; N6 entry, B; N4 entry, return to FINALIZE.
  const std::vector<vm::Word> want = {0x8000, 0x8008, 0x800C, 0x8010,
                                      0x8024, 0x8028, 0x802C, 0x200C};
  EXPECT_EQ(out.report->cflog, want);
  EXPECT_EQ(out.report->chl, chl_of(1));
  EXPECT_EQ(out.report->h_app, oracle::blake2s_ref(dev.image().app.bytes()));
  EXPECT_TRUE(out.report->out.empty());
  EXPECT_TRUE(verify(dev.runtime().public_key(), signed_message(*out.report), out.report->sigma));
  EXPECT_FALSE(dev.runtime().instance().active);
}

TEST(Runtime, SecondInitializeWhileActiveIsBusy) {
  Device dev(image_for("six_node_app.s"), test_keys());
  ASSERT_EQ(dev.begin(chl_of(1)), InitStatus::Ok);
  EXPECT_EQ(dev.begin(chl_of(2)), InitStatus::Busy);
  // The first session is untouched by the refused one.
  EXPECT_EQ(dev.runtime().instance().chl, chl_of(1));
  const auto out = dev.advance(10000, false);
  ASSERT_TRUE(out);
  ASSERT_EQ(out->status, AttestStatus::Reported);
  EXPECT_EQ(out->report->chl, chl_of(1));
  EXPECT_EQ(dev.begin(chl_of(3)), InitStatus::Ok);
}

TEST(Runtime, UnknownAppIsRejected) {
  SecureRuntime rt(test_keys(), {});
  vm::MachineState s = vm::make_machine();
  rt.install(s);
  EXPECT_EQ(rt.ism_initialize(s, chl_of(1), AppId{}), InitStatus::UnknownApp);
  EXPECT_FALSE(rt.instance().active);
}

TEST(Runtime, InitializeLocksConfigurationAndFinalizeRestoresIt) {
  SecureRuntime rt(test_keys(), {});
  vm::MachineState s = vm::make_machine();
  rt.install(s);
  const vm::Program p = vm::assemble("RET\n", mem::kAppCodeBase);
  vm::load_words(s, p.base, p.code);
  AppRecord app;
  app.id[0] = 1;
  app.size = 4;
  rt.register_app(app);
  vm::poke32(s, mem::kNsIvtBase + 12, 0x10000);
  const auto before = s;

  ASSERT_EQ(rt.ism_initialize(s, chl_of(9), app.id), InitStatus::Ok);
  EXPECT_EQ(vm::find_region(s, mem::kMpuBase)->world, vm::Attribution::Secure);
  EXPECT_TRUE(s.mpu[0].enabled);
  EXPECT_EQ(s.mpu[0].base, mem::kAppCodeBase);
  EXPECT_EQ(s.mpu[0].limit, mem::kAppCodeBase + 4);
  EXPECT_FALSE(s.mpu[0].perms.write);
  for (int i = 0; i < mem::kIrqCount; ++i) {
    EXPECT_EQ(s.nvic.itns[i], vm::World::Secure);
    EXPECT_EQ(vm::peek32(s, mem::kSecureIvtBase + 4 * i), mem::kDispatcherStub);
  }
  EXPECT_EQ(s.world, vm::World::NonSecure);
  EXPECT_EQ(s.mode, vm::Mode::Thread);
  EXPECT_EQ(s.pc, mem::kAppCodeBase);
  EXPECT_EQ(s.lr, mem::kFinalizeGate);
  EXPECT_TRUE(rt.instance().lac);
  EXPECT_EQ(rt.instance().sp0, s.sp_ns);
  EXPECT_EQ(rt.instance().h_app, oracle::blake2s_ref(p.bytes()));
  // The NS side can no longer reprogram the MPU.
  const auto f = vm::configure_mpu(s, vm::World::NonSecure, 2, vm::MpuRule{});
  ASSERT_TRUE(f);
  EXPECT_EQ(f->kind, vm::FaultKind::SecureAccessFault);

  const auto r = vm::run(s, &rt, 100);
  ASSERT_EQ(r.reason, vm::StopReason::Halted);
  EXPECT_EQ(s.halted, vm::HaltReason::Finalized);
  EXPECT_EQ(s.nvic.itns, before.nvic.itns);
  EXPECT_EQ(s.mpu, before.mpu);
  EXPECT_EQ(vm::find_region(s, mem::kMpuBase)->world, vm::Attribution::NonSecure);
  for (int i = 0; i < mem::kIrqCount; ++i) {
    EXPECT_EQ(vm::peek32(s, mem::kNsIvtBase + 4 * i), vm::peek32(before, mem::kNsIvtBase + 4 * i));
    EXPECT_EQ(vm::peek32(s, mem::kSecureIvtBase + 4 * i),
              vm::peek32(before, mem::kSecureIvtBase + 4 * i));
  }
}

TEST(Runtime, LogIsClosedWhileAnIsrRuns) {
  SecureRuntime rt(test_keys(), {});
  vm::MachineState s = vm::make_machine();
  rt.install(s);
  AppRecord app;
  app.size = 4;
  rt.register_app(app);
  ASSERT_EQ(rt.ism_initialize(s, chl_of(1), app.id), InitStatus::Ok);
  rt.log_gate(0x8000);
  ASSERT_EQ(rt.instance().cflog.entries.size(), 1u);

  vm::pend_irq(s, 3);
  ASSERT_FALSE(vm::check_interrupts(s));
  ASSERT_FALSE(rt.dispatcher_entry(s, 3));
  EXPECT_FALSE(rt.instance().lac);
  EXPECT_EQ(s.lr, mem::kDispatcherExitGate);
  // Stack between SP0 and the interrupted SP is read-only for the ISR.
  EXPECT_TRUE(s.mpu[1].enabled);
  EXPECT_FALSE(s.mpu[1].perms.write);
  EXPECT_LE(s.mpu[1].base, s.sp_ns);
  EXPECT_GE(s.mpu[1].limit, rt.instance().sp0);
  rt.log_gate(0x8004);
  EXPECT_EQ(rt.instance().cflog.entries.size(), 1u);

  ASSERT_FALSE(rt.dispatcher_exit(s));
  EXPECT_TRUE(rt.instance().lac);
  EXPECT_FALSE(s.mpu[1].enabled);
  EXPECT_EQ(s.pc, mem::kExecReturn);
  rt.log_gate(0x8008);
  EXPECT_EQ(rt.instance().cflog.entries, (std::vector<vm::Word>{0x8000, 0x8008}));
}

TEST(Runtime, FinalizeFromInsideAnIsrIsRefused) {
  SecureRuntime rt(test_keys(), {});
  vm::MachineState s = vm::make_machine();
  rt.install(s);
  AppRecord app;
  app.size = 4;
  rt.register_app(app);
  ASSERT_EQ(rt.ism_initialize(s, chl_of(1), app.id), InitStatus::Ok);
  vm::pend_irq(s, 3);
  ASSERT_FALSE(vm::check_interrupts(s));
  ASSERT_FALSE(rt.dispatcher_entry(s, 3));
  const auto r = rt.ism_finalize(s);
  ASSERT_TRUE(std::holds_alternative<Refused>(r));
  EXPECT_TRUE(rt.instance().active);
  rt.ism_abort(s);
  EXPECT_FALSE(rt.instance().active);
}

TEST(Runtime, DispatchExitWithoutFrameIsAProtocolViolation) {
  SecureRuntime rt(test_keys(), {});
  vm::MachineState s = vm::make_machine();
  const auto f = rt.dispatcher_exit(s);
  ASSERT_TRUE(f);
  EXPECT_EQ(f->kind, vm::FaultKind::ProtocolViolation);
}

TEST(Runtime, LogOverflowRefusesTheReport) {
  RuntimeConfig rc;
  rc.cflog_capacity_bytes = 12;
  Device dev(image_for("six_node_app.s", {}, rc), test_keys());
  const auto out = dev.attest(chl_of(1), 10000);
  EXPECT_EQ(out.status, AttestStatus::Refused);
  EXPECT_NE(out.detail.find("overflow"), std::string::npos) << out.detail;
  EXPECT_FALSE(out.report);
  EXPECT_FALSE(dev.runtime().instance().active);
}

TEST(Runtime, CfLogAppendRespectsCapacity) {
  CfLog log;
  log.capacity_bytes = 8;
  EXPECT_TRUE(log.append(1));
  EXPECT_TRUE(log.append(2));
  EXPECT_FALSE(log.append(3));
  EXPECT_TRUE(log.overflowed);
  EXPECT_FALSE(log.append(4));
  EXPECT_EQ(log.entries.size(), 2u);
}

TEST(Runtime, NestingBeyondTheDispatcherLimitFaults) {
  RuntimeConfig rc;
  rc.max_dispatch_depth = 0;
  DeviceImage img = image_for("two_task_app.s", {"ex1_isr.s"}, rc);
  img.schedule = {{5, 3}};
  Device dev(img, test_keys());
  const auto out = dev.attest(chl_of(1), 10000);
  ASSERT_EQ(out.status, AttestStatus::Faulted) << out.detail;
  EXPECT_EQ(out.fault->kind, vm::FaultKind::DispatcherOverflow);
}

TEST(Runtime, BoundOutputIsSignedAsLittleEndianR0) {
  RuntimeConfig rc;
  rc.bind_output = true;
  Device dev(image_for("six_node_app.s", {}, rc), test_keys());
  const auto out = dev.attest(chl_of(1), 10000);
  ASSERT_EQ(out.status, AttestStatus::Reported);
  // R0 = 1 + 1 + 4 + 5 on the N1, N3, N6, N4 path.
  EXPECT_EQ(out.report->out, (Bytes{11, 0, 0, 0}));
  EXPECT_TRUE(verify(dev.runtime().public_key(), signed_message(*out.report), out.report->sigma));
  Report r = *out.report;
  r.out[0] ^= 1;
  EXPECT_FALSE(verify(dev.runtime().public_key(), signed_message(r), r.sigma));
}

TEST(Runtime, BaselineLeavesInterruptRoutingAlone) {
  RuntimeConfig rc;
  rc.mode = RuntimeMode::Baseline;
  DeviceImage img = image_for("two_task_app.s", {"ex1_isr.s"}, rc);
  img.schedule = {{5, 3}};
  Device dev(img, test_keys());
  ASSERT_EQ(dev.begin(chl_of(1)), InitStatus::Ok);
  EXPECT_EQ(dev.state().nvic.itns[3], vm::World::NonSecure);
  const auto out = dev.advance(10000, true);
  ASSERT_TRUE(out);
  ASSERT_EQ(out->status, AttestStatus::Reported) << out->detail;
  const auto entry = std::find_if(out->trace.begin(), out->trace.end(), [](const vm::TraceRecord& t) {
    return t.event == vm::TraceEvent::IrqEntry;
  });
  ASSERT_NE(entry, out->trace.end());
  EXPECT_EQ(entry->world, vm::World::NonSecure);
  EXPECT_EQ(entry->pc, mem::kOtherCodeBase);
}

}  // namespace
