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

#include "iscflat/secure/runtime.hpp"

#include <algorithm>
#include <cstdio>

namespace iscflat::secure {

namespace {

using vm::Attribution;
using vm::Fault;
using vm::FaultKind;
using vm::MachineState;
using vm::World;
namespace mem = vm::mem;

constexpr int kLockSlot = 1;
constexpr int kCodeSlot = 0;

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

Fault fault(FaultKind k, const MachineState& s, std::string detail) {
  return Fault{k, s.pc, std::move(detail)};
}

// Return from a log veneer to the instrumented caller.
void return_to_caller(MachineState& s) {
  s.pc = s.lr;
  s.lr = s.gate_lr;
  s.world = World::NonSecure;
}

std::array<Word, mem::kIrqCount> read_ivt(const MachineState& s, Word base) {
  std::array<Word, mem::kIrqCount> t{};
  for (int i = 0; i < mem::kIrqCount; ++i) t[i] = vm::peek32(s, base + 4 * i);
  return t;
}

void write_ivt(MachineState& s, Word base,
               const std::array<Word, mem::kIrqCount>& t) {
  for (int i = 0; i < mem::kIrqCount; ++i) vm::poke32(s, base + 4 * i, t[i]);
}

}  // namespace

bool CfLog::append(Word v) {
  if (overflowed || (entries.size() + 1) * 4 > capacity_bytes) {
    overflowed = true;
    return false;
  }
  entries.push_back(v);
  return true;
}

SecureRuntime::SecureRuntime(KeyPair keys, RuntimeConfig config)
    : keys_(std::move(keys)), config_(config) {}

void SecureRuntime::install(MachineState& s) const {
  const auto veneer = [&](Word at, Service svc) {
    vm::poke32(s, at, vm::encode(vm::nsc_call(static_cast<Word>(svc))));
  };
  veneer(mem::kGateEntry, Service::LogEntry);
  veneer(mem::kGateDest, Service::LogDest);
  veneer(mem::kDispatcherExitGate, Service::DispatchExit);
  veneer(mem::kFinalizeGate, Service::Finalize);
  veneer(mem::kDispatcherStub, Service::Dispatch);
  for (int i = 0; i < mem::kIrqCount; ++i) {
    vm::poke32(s, mem::kSecureIvtBase + 4 * i, mem::kDispatcherStub);
  }
}

void SecureRuntime::register_app(AppRecord app) {
  for (AppRecord& a : apps_) {
    if (a.id == app.id) {
      a = std::move(app);
      return;
    }
  }
  apps_.push_back(std::move(app));
}

const AppRecord* SecureRuntime::find_app(const AppId& id) const {
  for (const AppRecord& a : apps_) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

InitStatus SecureRuntime::ism_initialize(MachineState& s, const Challenge& chl,
                                         const AppId& app_id) {
  // (1) one instance at a time.
  if (inst_.active) return InitStatus::Busy;
  const auto it = std::find_if(apps_.begin(), apps_.end(),
                               [&](const AppRecord& a) { return a.id == app_id; });
  if (it == apps_.end()) return InitStatus::UnknownApp;
  const AppRecord& app = *it;
  current_app_ = static_cast<std::size_t>(it - apps_.begin());

  s.world = World::Secure;

  inst_ = AttestationInstance{};
  inst_.chl = chl;
  inst_.app_id = app_id;
  inst_.cflog.capacity_bytes = config_.cflog_capacity_bytes;
  inst_.saved.itns = s.nvic.itns;
  inst_.saved.secure_ivt = read_ivt(s, mem::kSecureIvtBase);
  inst_.saved.ns_ivt = read_ivt(s, mem::kNsIvtBase);
  inst_.saved.mpu = s.mpu;
  inst_.saved.mpu_page = vm::find_region(s, mem::kMpuBase)->world;

  // (2) NS-MPU configuration page becomes Secure.
  vm::sau_set_attribution(s, mem::kMpuBase, Attribution::Secure);
  // (3) App code read-only.
  vm::MpuRule code;
  code.enabled = true;
  code.base = app.base;
  code.limit = app.base + app.size;
  code.perms = vm::Perms{true, false, true};
  (void)vm::configure_mpu(s, World::Secure, kCodeSlot, code);
  // (4) H(App) over the bytes actually resident in the code region.
  Bytes image(s.memory.begin() + app.base,
              s.memory.begin() + app.base + app.size);
  inst_.h_app = blake2s(image);
  // (5) every IRQ goes through the dispatcher.
  if (config_.mode == RuntimeMode::IscFlat) {
    for (int i = 0; i < mem::kIrqCount; ++i) {
      (void)vm::set_itns(s, World::Secure, i, World::Secure);
      vm::poke32(s, mem::kSecureIvtBase + 4 * i, mem::kDispatcherStub);
    }
  }
  // (6) SP0.
  inst_.sp0 = s.sp_ns;
  // (7) open the log.
  inst_.lac = true;
  inst_.active = true;
  last_finalize_.reset();
  // (8) jump to the App in NS Thread mode; its final return finalizes.
  s.pc = app.entry;
  s.lr = mem::kFinalizeGate;
  s.gate_lr = 0;
  s.world = World::NonSecure;
  s.mode = vm::Mode::Thread;
  return InitStatus::Ok;
}

Word SecureRuntime::to_original(Word v) const {
  if (!current_app_) return v;
  const AppRecord& app = apps_[*current_app_];
  if (app.addr_map.empty()) return v;
  return app.addr_map.to_original(v);
}

void SecureRuntime::log_gate(Word dest) {
  if (!inst_.active || !inst_.lac) return;
  if (!inst_.cflog.append(to_original(dest))) inst_.poisoned = true;
}

std::optional<Fault> SecureRuntime::on_gateway(MachineState& s, Word service) {
  switch (static_cast<Service>(service)) {
    case Service::LogEntry:
      log_gate(s.lr);
      return_to_caller(s);
      return std::nullopt;
    case Service::LogDest: {
      const Word sp = s.sp_ns;
      if (sp % 4 != 0 || sp < mem::kNsStackBase || sp + 4 > mem::kNsStackTop) {
        return fault(FaultKind::StackOverflow, s,
                     "destination gate with bad sp " + hex(sp));
      }
      const Word dest = vm::peek32(s, sp);
      s.sp_ns = sp + 4;
      log_gate(dest);
      return_to_caller(s);
      return std::nullopt;
    }
    case Service::Dispatch:
      if (s.active.empty()) {
        return fault(FaultKind::ProtocolViolation, s,
                     "dispatcher entered without an exception");
      }
      return dispatcher_entry(s, s.active.back().irq);
    case Service::DispatchExit:
      return dispatcher_exit(s);
    case Service::Finalize:
      last_finalize_ = ism_finalize(s);
      s.halted = std::holds_alternative<Report>(*last_finalize_)
                     ? vm::HaltReason::Finalized
                     : vm::HaltReason::Refused;
      return std::nullopt;
  }
  return fault(FaultKind::IllegalInstruction, s,
               "unknown secure service " + std::to_string(service));
}

std::optional<Fault> SecureRuntime::dispatcher_entry(MachineState& s, int irq) {
  const Word isr = vm::peek32(s, mem::kNsIvtBase + 4 * static_cast<Word>(irq));
  if (!inst_.active || config_.mode == RuntimeMode::Baseline) {
    // Pass-through: the ISR returns straight through EXEC_RETURN.
    s.pc = isr;
    s.world = World::NonSecure;
    return std::nullopt;
  }
  if (inst_.frames.size() >= config_.max_dispatch_depth) {
    return fault(FaultKind::DispatcherOverflow, s,
                 "dispatcher nesting deeper than " +
                     std::to_string(config_.max_dispatch_depth));
  }
  DispatcherFrame f;
  f.saved_lac = inst_.lac;
  f.saved_sp_c = s.sp_ns;
  f.regs = s.r;
  f.lr = s.lr;
  f.gate_lr = s.gate_lr;
  f.flags = s.flags;
  f.saved_mpu = s.mpu;
  f.irq = irq;
  inst_.frames.push_back(f);

  // Lock [min(SP0, SP_c), max(SP0, SP_c)] read-only for the ISR.
  vm::MpuRule lock;
  lock.enabled = true;
  lock.base = std::min(s.sp_ns, inst_.sp0);
  lock.limit = std::max(s.sp_ns, inst_.sp0) + 4;
  lock.perms = vm::Perms{true, false, false};
  (void)vm::configure_mpu(s, World::Secure, kLockSlot, lock);
  inst_.lac = false;

  s.pc = isr;
  s.lr = mem::kDispatcherExitGate;
  s.world = World::NonSecure;
  return std::nullopt;
}

std::optional<Fault> SecureRuntime::dispatcher_exit(MachineState& s) {
  if (s.mode != vm::Mode::Handler || inst_.frames.empty()) {
    return fault(FaultKind::ProtocolViolation, s,
                 "dispatcher exit without an outstanding frame");
  }
  const DispatcherFrame f = inst_.frames.back();
  inst_.frames.pop_back();
  s.r = f.regs;
  s.lr = f.lr;
  s.gate_lr = f.gate_lr;
  s.flags = f.flags;
  s.sp_ns = f.saved_sp_c;
  s.mpu = f.saved_mpu;
  inst_.lac = f.saved_lac;
  // The hardware frame below SP_c is unstacked by the exception return.
  s.pc = mem::kExecReturn;
  return std::nullopt;
}

void SecureRuntime::restore_config(MachineState& s) const {
  s.nvic.itns = inst_.saved.itns;
  write_ivt(s, mem::kSecureIvtBase, inst_.saved.secure_ivt);
  write_ivt(s, mem::kNsIvtBase, inst_.saved.ns_ivt);
  s.mpu = inst_.saved.mpu;
  vm::sau_set_attribution(s, mem::kMpuBase, inst_.saved.mpu_page);
}

FinalizeResult SecureRuntime::ism_finalize(MachineState& s) {
  s.world = World::Secure;
  if (!inst_.active) return Refused{"no active attestation instance"};
  if (inst_.poisoned) return Refused{"control-flow log overflowed"};
  if (!inst_.frames.empty() || s.mode != vm::Mode::Thread) {
    return Refused{"finalization with interrupted context outstanding"};
  }
  Report r;
  r.cflog = inst_.cflog.entries;
  r.h_app = inst_.h_app;
  r.chl = inst_.chl;
  if (config_.bind_output) {
    for (int i = 0; i < 4; ++i) {
      r.out.push_back(static_cast<std::uint8_t>(s.r[0] >> (8 * i)));
    }
  }
  r.sigma = keys_.sign(signed_message(r));
  inst_.lac = false;
  restore_config(s);
  inst_.active = false;
  return r;
}

void SecureRuntime::ism_abort(MachineState& s) {
  if (!inst_.active) return;
  inst_.lac = false;
  restore_config(s);
  inst_.frames.clear();
  inst_.active = false;
}

}  // namespace iscflat::secure
