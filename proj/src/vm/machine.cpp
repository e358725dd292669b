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

#include "iscflat/vm/machine.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>

namespace iscflat::vm {

namespace {

constexpr std::array<std::string_view, 10> kFaultNames = {
    "SecureAccessFault", "MpuReadFault",       "MpuWriteFault",
    "MpuExecFault",      "AlignmentFault",     "IllegalInstruction",
    "StackOverflow",     "BusFault",           "DispatcherOverflow",
    "ProtocolViolation"};

std::string hex(Word v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%x", v);
  return buf;
}

Fault make_fault(FaultKind k, Word pc, std::string detail) {
  return Fault{k, pc, std::move(detail)};
}

void record(Trace* trace, TraceRecord rec) {
  if (trace != nullptr) trace->push_back(rec);
}

void record_fault(const MachineState& s, Trace* trace, const Fault& f) {
  record(trace, {s.retired, f.at_pc, s.world, TraceEvent::Fault, 0, -1});
}

Word& reg(MachineState& s, std::uint8_t idx) {
  if (idx == kRegSp) return s.sp();
  if (idx == kRegLr) return s.lr;
  return s.r[idx];
}

bool cond_holds(const Flags& f, Cond c) {
  switch (c) {
    case Cond::EQ: return f.z;
    case Cond::NE: return !f.z;
    case Cond::LT: return f.n != f.v;
    case Cond::GE: return f.n == f.v;
    case Cond::GT: return !f.z && f.n == f.v;
    case Cond::LE: return f.z || f.n != f.v;
    case Cond::LO: return !f.c;
    case Cond::HS: return f.c;
  }
  return false;
}

Flags compare(Word a, Word b) {
  const Word r = a - b;
  Flags f;
  f.n = (r >> 31) != 0;
  f.z = r == 0;
  f.c = a >= b;
  f.v = (((a ^ b) & (a ^ r)) >> 31) != 0;
  return f;
}

Word stack_base(World w) {
  return w == World::NonSecure ? mem::kNsStackBase : mem::kSecureStackBase;
}
Word stack_top(World w) {
  return w == World::NonSecure ? mem::kNsStackTop : mem::kSecureStackTop;
}

bool in_page(Word addr, Word base) {
  return addr >= base && addr - base < mem::kRegPageSize;
}

Word mpu_attr(const MpuRule& r) {
  Word a = 0;
  if (r.perms.read) a |= mem::kMpuAttrRead;
  if (r.perms.write) a |= mem::kMpuAttrWrite;
  if (r.perms.execute) a |= mem::kMpuAttrExec;
  if (r.enabled) a |= mem::kMpuAttrEnable;
  return a;
}

Word device_read(const MachineState& s, Word addr) {
  if (in_page(addr, mem::kItnsBase)) {
    if (addr != mem::kItnsBase) return 0;
    Word bits = 0;
    for (int i = 0; i < mem::kIrqCount; ++i) {
      if (s.nvic.itns[i] == World::NonSecure) bits |= 1u << i;
    }
    return bits;
  }
  if (in_page(addr, mem::kMpuBase)) {
    const Word off = addr - mem::kMpuBase;
    const Word slot = off / mem::kMpuSlotStride;
    if (slot >= static_cast<Word>(mem::kMpuSlots)) return 0;
    const MpuRule& r = s.mpu[slot];
    switch (off % mem::kMpuSlotStride) {
      case mem::kMpuRegBase: return r.base;
      case mem::kMpuRegLimit: return r.limit;
      case mem::kMpuRegAttr: return mpu_attr(r);
      default: return 0;
    }
  }
  if (in_page(addr, mem::kTimerBase)) {
    switch (addr - mem::kTimerBase) {
      case mem::kTimerCount: return s.timer.armed ? s.timer.remaining : 0;
      case mem::kTimerIrq: return static_cast<Word>(s.timer.irq);
      case mem::kTimerReload: return s.timer.reload;
      default: return 0;
    }
  }
  return peek32(s, addr);
}

void device_write(MachineState& s, Word addr, Word value) {
  if (in_page(addr, mem::kItnsBase)) {
    if (addr != mem::kItnsBase) return;
    for (int i = 0; i < mem::kIrqCount; ++i) {
      s.nvic.itns[i] =
          (value >> i) & 1u ? World::NonSecure : World::Secure;
    }
    return;
  }
  if (in_page(addr, mem::kMpuBase)) {
    const Word off = addr - mem::kMpuBase;
    const Word slot = off / mem::kMpuSlotStride;
    if (slot >= static_cast<Word>(mem::kMpuSlots)) return;
    MpuRule& r = s.mpu[slot];
    switch (off % mem::kMpuSlotStride) {
      case mem::kMpuRegBase: r.base = value; break;
      case mem::kMpuRegLimit: r.limit = value; break;
      case mem::kMpuRegAttr:
        r.perms.read = value & mem::kMpuAttrRead;
        r.perms.write = value & mem::kMpuAttrWrite;
        r.perms.execute = value & mem::kMpuAttrExec;
        r.enabled = value & mem::kMpuAttrEnable;
        break;
      default: break;
    }
    return;
  }
  if (in_page(addr, mem::kTimerBase)) {
    switch (addr - mem::kTimerBase) {
      case mem::kTimerCount:
        s.timer.remaining = value;
        s.timer.armed = value != 0;
        s.timer.skip_tick = true;
        break;
      case mem::kTimerIrq:
        s.timer.irq = static_cast<int>(value % mem::kIrqCount);
        break;
      case mem::kTimerReload: s.timer.reload = value; break;
      default: break;
    }
    return;
  }
  poke32(s, addr, value);
}

void tick_timer(MachineState& s) {
  Timer& t = s.timer;
  if (!t.armed) return;
  if (t.skip_tick) {
    t.skip_tick = false;
    return;
  }
  if (--t.remaining == 0) {
    pend_irq(s, t.irq);
    t.armed = t.reload != 0;
    t.remaining = t.reload;
  }
}

void apply_schedule(MachineState& s) {
  while (s.next_scheduled < s.schedule.size() &&
         s.schedule[s.next_scheduled].at_retired <= s.retired) {
    pend_irq(s, s.schedule[s.next_scheduled].irq);
    ++s.next_scheduled;
  }
}

std::optional<Fault> push_word(MachineState& s, Word value, Word pc) {
  const Word next = s.sp() - 4;
  if (s.sp() < stack_base(s.world) + 4 || s.sp() > stack_top(s.world)) {
    return make_fault(FaultKind::StackOverflow, pc,
                      "push at sp " + hex(s.sp()));
  }
  if (auto f = bus_write(s, next, s.world, value)) {
    f->at_pc = pc;
    return f;
  }
  s.sp() = next;
  return std::nullopt;
}

// BL/BLX from NS code into a veneer: the caller's LR is banked so the
// veneer can return to it after the gate overwrote LR.
void bank_gate_lr(MachineState& s, Word target) {
  if (s.world == World::NonSecure &&
      in_region(s, target, Attribution::NonSecureCallable)) {
    s.gate_lr = s.lr;
  }
}

}  // namespace

InterruptController::InterruptController() {
  itns.fill(World::NonSecure);
  priority.fill(8);
}

Word Flags::pack() const {
  return (n ? 1u << 31 : 0u) | (z ? 1u << 30 : 0u) | (c ? 1u << 29 : 0u) |
         (v ? 1u << 28 : 0u);
}

Flags Flags::unpack(Word w) {
  return Flags{(w >> 31 & 1u) != 0, (w >> 30 & 1u) != 0, (w >> 29 & 1u) != 0,
               (w >> 28 & 1u) != 0};
}

std::string_view fault_name(FaultKind k) {
  return kFaultNames[static_cast<std::size_t>(k)];
}

std::optional<FaultKind> fault_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFaultNames.size(); ++i) {
    if (kFaultNames[i] == name) return static_cast<FaultKind>(i);
  }
  return std::nullopt;
}

MachineState make_machine() {
  using A = Attribution;
  const Perms rx{true, false, true};
  const Perms rw{true, true, false};
  const Perms rwx{true, true, true};
  MachineState s;
  s.memory.assign(mem::kMemorySize, 0);
  s.regions = {
      {"secure_code", mem::kSecureCodeBase, mem::kSecureCodeSize, A::Secure, rx},
      {"secure_data", mem::kSecureDataBase, mem::kSecureDataSize, A::Secure, rw},
      {"nsc", mem::kNscBase, mem::kNscSize, A::NonSecureCallable, rx},
      {"secure_ivt", mem::kSecureIvtBase, mem::kIvtSize, A::Secure, rw},
      {"itns", mem::kItnsBase, mem::kRegPageSize, A::Secure, rw},
      {"mpu", mem::kMpuBase, mem::kRegPageSize, A::NonSecure, rw},
      {"timer", mem::kTimerBase, mem::kRegPageSize, A::NonSecure, rw},
      {"ns_ivt", mem::kNsIvtBase, mem::kIvtSize, A::NonSecure, rw},
      {"app_code", mem::kAppCodeBase, mem::kAppCodeSize, A::NonSecure, rwx},
      {"other_code", mem::kOtherCodeBase, mem::kOtherCodeSize, A::NonSecure,
       rwx},
      {"ns_data", mem::kNsDataBase, mem::kNsDataSize, A::NonSecure, rw},
      {"ns_stack", mem::kNsStackBase, mem::kNsStackSize, A::NonSecure, rw},
      {"secure_stack", mem::kSecureStackBase, mem::kSecureStackSize, A::Secure,
       rw},
  };
  return s;
}

const MemoryRegion* find_region(const MachineState& s, Word addr) {
  for (const MemoryRegion& r : s.regions) {
    if (r.contains(addr)) return &r;
  }
  return nullptr;
}

MemoryRegion* find_region(MachineState& s, Word addr) {
  for (MemoryRegion& r : s.regions) {
    if (r.contains(addr)) return &r;
  }
  return nullptr;
}

bool in_region(const MachineState& s, Word addr, Attribution a) {
  const MemoryRegion* r = find_region(s, addr);
  return r != nullptr && r->world == a;
}

Word peek32(const MachineState& s, Word addr) {
  if (addr > s.memory.size() || s.memory.size() - addr < 4) {
    throw std::out_of_range("peek32 outside memory: " + hex(addr));
  }
  return static_cast<Word>(s.memory[addr]) |
         static_cast<Word>(s.memory[addr + 1]) << 8 |
         static_cast<Word>(s.memory[addr + 2]) << 16 |
         static_cast<Word>(s.memory[addr + 3]) << 24;
}

void poke32(MachineState& s, Word addr, Word value) {
  if (addr > s.memory.size() || s.memory.size() - addr < 4) {
    throw std::out_of_range("poke32 outside memory: " + hex(addr));
  }
  for (int i = 0; i < 4; ++i) {
    s.memory[addr + i] = static_cast<std::uint8_t>(value >> (8 * i));
  }
}

Perms effective_ns_perms(const MachineState& s, Word addr) {
  const MemoryRegion* region = find_region(s, addr);
  if (region == nullptr) return Perms{false, false, false};
  Perms p = region->perms;
  for (const MpuRule& rule : s.mpu) {
    if (!rule.enabled || addr < rule.base || addr >= rule.limit) continue;
    p.read = p.read && rule.perms.read;
    p.write = p.write && rule.perms.write;
    p.execute = p.execute && rule.perms.execute;
  }
  return p;
}

std::optional<Fault> check_access(const MachineState& s, Word addr, Access a,
                                  World world) {
  if (addr % 4 != 0) {
    return make_fault(FaultKind::AlignmentFault, s.pc,
                      "unaligned access " + hex(addr));
  }
  const MemoryRegion* region = find_region(s, addr);
  if (region == nullptr) {
    if (world == World::NonSecure) {
      return make_fault(FaultKind::SecureAccessFault, s.pc,
                        "unattributed address " + hex(addr));
    }
    return make_fault(FaultKind::BusFault, s.pc, "unmapped " + hex(addr));
  }
  if (world == World::Secure) {
    if (a == Access::Exec && region->world == Attribution::NonSecure) {
      return make_fault(FaultKind::SecureAccessFault, s.pc,
                        "secure fetch from NS memory " + hex(addr));
    }
    if (a == Access::Exec && !region->perms.execute) {
      return make_fault(FaultKind::MpuExecFault, s.pc,
                        "fetch from non-executable " + hex(addr));
    }
    return std::nullopt;
  }
  if (region->world == Attribution::Secure) {
    return make_fault(FaultKind::SecureAccessFault, s.pc,
                      "NS access to secure " + region->name + " at " +
                          hex(addr));
  }
  if (region->world == Attribution::NonSecureCallable) {
    if (a == Access::Exec) return std::nullopt;
    return make_fault(FaultKind::SecureAccessFault, s.pc,
                      "NS data access to NSC " + hex(addr));
  }
  const Perms p = effective_ns_perms(s, addr);
  switch (a) {
    case Access::Read:
      if (!p.read) {
        return make_fault(FaultKind::MpuReadFault, s.pc,
                          "read denied at " + hex(addr));
      }
      break;
    case Access::Write:
      if (!p.write) {
        return make_fault(FaultKind::MpuWriteFault, s.pc,
                          "write denied at " + hex(addr));
      }
      break;
    case Access::Exec:
      if (!p.execute) {
        return make_fault(FaultKind::MpuExecFault, s.pc,
                          "fetch denied at " + hex(addr));
      }
      break;
  }
  return std::nullopt;
}

std::optional<Fault> bus_read(MachineState& s, Word addr, World world,
                              Word& out) {
  if (auto f = check_access(s, addr, Access::Read, world)) return f;
  out = device_read(s, addr);
  return std::nullopt;
}

std::optional<Fault> bus_write(MachineState& s, Word addr, World world,
                               Word value) {
  if (auto f = check_access(s, addr, Access::Write, world)) return f;
  device_write(s, addr, value);
  return std::nullopt;
}

std::optional<Fault> step(MachineState& s, SecureMonitor* monitor,
                          Trace* trace) {
  if (s.halted != HaltReason::None) return std::nullopt;
  const Word pc = s.pc;
  const World fetch_world = s.world;
  const auto fail = [&](Fault f) {
    f.at_pc = pc;
    record_fault(s, trace, f);
    return f;
  };

  if (auto f = check_access(s, pc, Access::Exec, s.world)) return fail(*f);
  const Word raw = peek32(s, pc);
  const std::optional<Instruction> decoded = decode(raw);
  if (!decoded) {
    return fail(make_fault(FaultKind::IllegalInstruction, pc,
                           "undecodable word " + hex(raw)));
  }
  const Instruction& in = *decoded;
  const auto operand2 = [&] { return in.imm_form ? in.imm : reg(s, in.rs); };
  Word next = pc + kInstrBytes;

  switch (in.op) {
    case Opcode::Mov:
      reg(s, in.rd) = operand2();
      break;
    case Opcode::Add:
      reg(s, in.rd) += operand2();
      break;
    case Opcode::Sub:
      reg(s, in.rd) -= operand2();
      break;
    case Opcode::Cmp:
      s.flags = compare(reg(s, in.rd), operand2());
      break;
    case Opcode::Load: {
      Word v = 0;
      if (auto f = bus_read(s, reg(s, in.rs) + in.imm, s.world, v)) {
        return fail(*f);
      }
      reg(s, in.rd) = v;
      break;
    }
    case Opcode::Store:
      if (auto f = bus_write(s, reg(s, in.rs) + in.imm, s.world,
                             reg(s, in.rd))) {
        return fail(*f);
      }
      break;
    case Opcode::Push:
      if (auto f = push_word(s, reg(s, in.rd), pc)) return fail(*f);
      break;
    case Opcode::Pop: {
      const Word addr = s.sp();
      if (addr < stack_base(s.world) || addr + 4 > stack_top(s.world)) {
        return fail(make_fault(FaultKind::StackOverflow, pc,
                               "pop at sp " + hex(addr)));
      }
      Word v = 0;
      if (auto f = bus_read(s, addr, s.world, v)) return fail(*f);
      s.sp() = addr + 4;
      reg(s, in.rd) = v;
      break;
    }
    case Opcode::B:
      next = in.imm;
      break;
    case Opcode::Bcc:
      if (cond_holds(s.flags, static_cast<Cond>(in.rs))) next = in.imm;
      break;
    case Opcode::Bl:
      bank_gate_lr(s, in.imm);
      s.lr = pc + kInstrBytes;
      next = in.imm;
      break;
    case Opcode::Bx:
      next = reg(s, in.rd);
      break;
    case Opcode::Blx: {
      const Word target = reg(s, in.rd);
      bank_gate_lr(s, target);
      s.lr = pc + kInstrBytes;
      next = target;
      break;
    }
    case Opcode::Ret:
      next = s.lr;
      break;
    case Opcode::NscCall: {
      const bool from_veneer =
          s.world == World::NonSecure &&
          in_region(s, pc, Attribution::NonSecureCallable);
      if (!from_veneer && s.world != World::Secure) {
        return fail(make_fault(FaultKind::SecureAccessFault, pc,
                               "gateway outside NSC region"));
      }
      if (monitor == nullptr) {
        return fail(make_fault(FaultKind::IllegalInstruction, pc,
                               "no secure firmware"));
      }
      s.world = World::Secure;
      s.pc = next;
      if (auto f = monitor->on_gateway(s, in.imm)) return fail(*f);
      next = s.pc;
      break;
    }
    case Opcode::Wfi:
      break;
    case Opcode::Halt:
      s.halted = HaltReason::Halt;
      next = pc;
      break;
  }

  s.pc = next;
  ++s.retired;
  record(trace, {s.retired, pc, fetch_world, TraceEvent::Retire, raw, -1});
  if (s.halted != HaltReason::None) {
    record(trace, {s.retired, s.pc, s.world, TraceEvent::Halt, 0, -1});
    return std::nullopt;
  }
  if (s.pc == mem::kExecReturn && s.mode == Mode::Handler) {
    if (auto f = exec_return(s, trace)) return f;
  }
  tick_timer(s);
  apply_schedule(s);
  return check_interrupts(s, trace);
}

RunResult run(MachineState& s, SecureMonitor* monitor, std::uint64_t max_steps,
              bool record_trace) {
  if (max_steps == 0) throw std::invalid_argument("max_steps must be > 0");
  RunResult result;
  Trace* trace = record_trace ? &result.trace : nullptr;
  // Interrupts due before the first instruction are taken up front.
  apply_schedule(s);
  if (auto f = check_interrupts(s, trace)) {
    result.reason = StopReason::Faulted;
    result.fault = std::move(f);
    return result;
  }
  while (result.steps < max_steps) {
    if (s.halted != HaltReason::None) {
      result.reason = StopReason::Halted;
      return result;
    }
    ++result.steps;
    if (auto f = step(s, monitor, trace)) {
      result.reason = StopReason::Faulted;
      result.fault = std::move(f);
      return result;
    }
  }
  result.reason = s.halted != HaltReason::None ? StopReason::Halted
                                               : StopReason::StepLimit;
  return result;
}

void pend_irq(MachineState& s, int irq) {
  if (irq < 0 || irq >= mem::kIrqCount) {
    throw std::out_of_range("irq out of range: " + std::to_string(irq));
  }
  auto& p = s.nvic.pending;
  auto it = std::lower_bound(p.begin(), p.end(), irq);
  if (it == p.end() || *it != irq) p.insert(it, irq);
}

void arm_timer(MachineState& s, Word fire_after, int irq, Word reload) {
  s.timer = Timer{fire_after != 0, fire_after, irq, reload, false};
}

std::optional<Fault> check_interrupts(MachineState& s, Trace* trace) {
  if (s.nvic.pending.empty() || s.halted != HaltReason::None) {
    return std::nullopt;
  }
  if (s.world == World::Secure ||
      in_region(s, s.pc, Attribution::NonSecureCallable)) {
    return std::nullopt;
  }
  auto& pending = s.nvic.pending;
  const auto best = std::min_element(
      pending.begin(), pending.end(), [&](int a, int b) {
        const int pa = s.nvic.priority[a];
        const int pb = s.nvic.priority[b];
        return pa != pb ? pa < pb : a < b;
      });
  const int irq = *best;
  const int prio = s.nvic.priority[irq];
  if (!s.active.empty() &&
      (!s.nvic.preemption_enabled || prio >= s.active.back().priority)) {
    return std::nullopt;
  }

  const World from = s.world;
  Word& sp = s.sp();
  if (sp < stack_base(from) + mem::kFrameBytes || sp > stack_top(from)) {
    Fault f = make_fault(FaultKind::StackOverflow, s.pc,
                         "no room for exception frame at " + hex(sp));
    record_fault(s, trace, f);
    return f;
  }
  const Word frame = sp - mem::kFrameBytes;
  const std::array<Word, mem::kFrameWords> words = {
      s.r[0], s.r[1], s.r[2], s.r[3], s.r[12], s.lr, s.pc, s.flags.pack()};
  for (int i = 0; i < mem::kFrameWords; ++i) {
    if (auto f = check_access(s, frame + 4 * i, Access::Write, from)) {
      f->detail = "exception stacking: " + f->detail;
      record_fault(s, trace, *f);
      return f;
    }
  }
  for (int i = 0; i < mem::kFrameWords; ++i) poke32(s, frame + 4 * i, words[i]);
  sp = frame;
  pending.erase(best);

  s.active.push_back({irq, prio, from, s.mode});
  const World target = s.nvic.itns[irq];
  s.world = target;
  s.mode = Mode::Handler;
  s.lr = mem::kExecReturn;
  const Word ivt =
      target == World::Secure ? mem::kSecureIvtBase : mem::kNsIvtBase;
  s.pc = peek32(s, ivt + 4 * static_cast<Word>(irq));
  record(trace, {s.retired, s.pc, target, TraceEvent::IrqEntry, 0, irq});
  return std::nullopt;
}

std::optional<Fault> exec_return(MachineState& s, Trace* trace) {
  if (s.mode != Mode::Handler || s.active.empty()) {
    Fault f = make_fault(FaultKind::ProtocolViolation, s.pc,
                         "exception return outside handler");
    record_fault(s, trace, f);
    return f;
  }
  const ActiveException e = s.active.back();
  Word& sp = e.world == World::NonSecure ? s.sp_ns : s.sp_s;
  if (sp % 4 != 0) {
    Fault f = make_fault(FaultKind::AlignmentFault, s.pc,
                         "unaligned frame pointer " + hex(sp));
    record_fault(s, trace, f);
    return f;
  }
  if (sp < stack_base(e.world) || sp + mem::kFrameBytes > stack_top(e.world)) {
    Fault f = make_fault(FaultKind::StackOverflow, s.pc,
                         "frame pointer outside stack " + hex(sp));
    record_fault(s, trace, f);
    return f;
  }
  std::array<Word, mem::kFrameWords> w{};
  for (int i = 0; i < mem::kFrameWords; ++i) w[i] = peek32(s, sp + 4 * i);
  s.r[0] = w[0];
  s.r[1] = w[1];
  s.r[2] = w[2];
  s.r[3] = w[3];
  s.r[12] = w[4];
  s.lr = w[5];
  s.pc = w[6];
  s.flags = Flags::unpack(w[7]);
  sp += mem::kFrameBytes;
  s.active.pop_back();
  s.world = e.world;
  s.mode = e.mode;
  record(trace, {s.retired, s.pc, s.world, TraceEvent::ExcReturn, 0, e.irq});
  return std::nullopt;
}

std::optional<Fault> configure_mpu(MachineState& s, World caller,
                                   std::size_t slot, const MpuRule& rule) {
  if (slot >= static_cast<std::size_t>(mem::kMpuSlots)) {
    throw std::out_of_range("MPU slot " + std::to_string(slot));
  }
  const Word at = mem::kMpuBase + static_cast<Word>(slot) * mem::kMpuSlotStride;
  if (auto f = bus_write(s, at + mem::kMpuRegAttr, caller, 0)) return f;
  if (auto f = bus_write(s, at + mem::kMpuRegBase, caller, rule.base)) return f;
  if (auto f = bus_write(s, at + mem::kMpuRegLimit, caller, rule.limit)) {
    return f;
  }
  return bus_write(s, at + mem::kMpuRegAttr, caller, mpu_attr(rule));
}

std::optional<Fault> set_itns(MachineState& s, World caller, int irq,
                              World target) {
  if (irq < 0 || irq >= mem::kIrqCount) {
    throw std::out_of_range("irq out of range: " + std::to_string(irq));
  }
  Word bits = 0;
  if (auto f = bus_read(s, mem::kItnsBase, caller, bits)) return f;
  if (target == World::NonSecure) {
    bits |= 1u << irq;
  } else {
    bits &= ~(1u << irq);
  }
  return bus_write(s, mem::kItnsBase, caller, bits);
}

void sau_set_attribution(MachineState& s, Word region_base, Attribution a) {
  for (MemoryRegion& r : s.regions) {
    if (r.base == region_base) {
      r.world = a;
      return;
    }
  }
  throw std::out_of_range("no region at " + hex(region_base));
}

void load_words(MachineState& s, Word base, const std::vector<Word>& words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    poke32(s, base + static_cast<Word>(4 * i), words[i]);
  }
}

std::string_view world_name(World w) {
  return w == World::Secure ? "S" : "NS";
}

std::string_view event_name(TraceEvent e) {
  switch (e) {
    case TraceEvent::Retire: return "retire";
    case TraceEvent::IrqEntry: return "irq-entry";
    case TraceEvent::ExcReturn: return "exc-return";
    case TraceEvent::Fault: return "fault";
    case TraceEvent::Halt: return "halt";
  }
  return "?";
}

void write_trace(std::ostream& os, const Trace& trace) {
  char buf[96];
  for (const TraceRecord& r : trace) {
    std::snprintf(buf, sizeof buf, "%llu 0x%05x %s %s",
                  static_cast<unsigned long long>(r.retired), r.pc,
                  world_name(r.world).data(), event_name(r.event).data());
    os << buf;
    if (r.event == TraceEvent::Retire) {
      if (auto in = decode(r.insn)) os << "  " << disassemble(*in);
    } else if (r.irq >= 0) {
      os << ":" << r.irq;
    }
    os << '\n';
  }
}

}  // namespace iscflat::vm
