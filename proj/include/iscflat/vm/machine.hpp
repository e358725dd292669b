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

// Deterministic two-world MCU model.
//
// A MachineState is a self-contained value: registers, both stack pointers,
// the byte store with its SAU attribution table, NS-MPU rules, the interrupt
// controller and the instruction-count timer. step() retires exactly one
// instruction and then polls for interrupts; faults are returned as values
// and end the run.
//
// Secure-world firmware is native code reached through NSC_CALL; the
// machine forwards those to a SecureMonitor. Interrupts are only taken
// between instructions, never while the CPU is in the Secure world, and never
// while the next fetch is an NSC veneer (a call into a veneer and the veneer's
// gateway instruction execute as a pair).

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "iscflat/vm/isa.hpp"
#include "iscflat/vm/memory_map.hpp"

namespace iscflat::vm {

enum class World : std::uint8_t { Secure, NonSecure };
enum class Mode : std::uint8_t { Thread, Handler };
enum class Attribution : std::uint8_t { Secure, NonSecure, NonSecureCallable };

struct Perms {
  bool read = true;
  bool write = false;
  bool execute = false;

  friend bool operator==(const Perms&, const Perms&) = default;
};

struct MemoryRegion {
  std::string name;
  Word base = 0;
  Word size = 0;
  Attribution world = Attribution::Secure;
  Perms perms;

  bool contains(Word addr) const { return addr >= base && addr - base < size; }
};

// One NS-MPU slot. Covers [base, limit); an enabled rule restricts the
// static permissions of every NS address it covers.
struct MpuRule {
  bool enabled = false;
  Word base = 0;
  Word limit = 0;
  Perms perms;

  friend bool operator==(const MpuRule&, const MpuRule&) = default;
};

using MpuConfig = std::array<MpuRule, mem::kMpuSlots>;

struct InterruptController {
  std::array<World, mem::kIrqCount> itns;
  std::vector<int> pending;  // sorted, unique
  std::array<int, mem::kIrqCount> priority;
  bool preemption_enabled = true;

  InterruptController();
};

struct Timer {
  bool armed = false;
  Word remaining = 0;
  int irq = 0;
  Word reload = 0;
  bool skip_tick = false;  // set when armed by the instruction now retiring
};

// External interrupt stimulus: raise `irq` once `at_retired` instructions
// have retired.
struct ScheduledIrq {
  std::uint64_t at_retired = 0;
  int irq = 0;
};

struct ActiveException {
  int irq = 0;
  int priority = 0;
  World world = World::NonSecure;  // world of the interrupted code
  Mode mode = Mode::Thread;
};

struct Flags {
  bool n = false;
  bool z = false;
  bool c = false;
  bool v = false;

  Word pack() const;
  static Flags unpack(Word w);
  friend bool operator==(const Flags&, const Flags&) = default;
};

enum class FaultKind : std::uint8_t {
  SecureAccessFault,
  MpuReadFault,
  MpuWriteFault,
  MpuExecFault,
  AlignmentFault,
  IllegalInstruction,
  StackOverflow,
  BusFault,
  DispatcherOverflow,
  ProtocolViolation,
};

std::string_view fault_name(FaultKind k);
std::optional<FaultKind> fault_from_name(std::string_view name);

struct Fault {
  FaultKind kind = FaultKind::IllegalInstruction;
  Word at_pc = 0;
  std::string detail;
};

enum class HaltReason : std::uint8_t { None, Halt, Finalized, Refused };

struct MachineState {
  std::array<Word, kGeneralRegs> r{};
  Word sp_ns = mem::kNsStackTop;
  Word sp_s = mem::kSecureStackTop;
  Word lr = 0;
  Word pc = mem::kAppCodeBase;
  Word gate_lr = 0;  // caller LR banked by a BL/BLX into an NSC veneer
  Flags flags;
  World world = World::NonSecure;
  Mode mode = Mode::Thread;

  std::vector<std::uint8_t> memory;
  std::vector<MemoryRegion> regions;
  MpuConfig mpu{};

  InterruptController nvic;
  Timer timer;
  std::vector<ScheduledIrq> schedule;
  std::size_t next_scheduled = 0;
  std::vector<ActiveException> active;

  std::uint64_t retired = 0;
  HaltReason halted = HaltReason::None;

  Word& sp() { return world == World::NonSecure ? sp_ns : sp_s; }
  Word sp() const { return world == World::NonSecure ? sp_ns : sp_s; }
};

// Fresh machine with the default region table and zeroed memory.
MachineState make_machine();

const MemoryRegion* find_region(const MachineState& s, Word addr);
MemoryRegion* find_region(MachineState& s, Word addr);
bool in_region(const MachineState& s, Word addr, Attribution a);

// Raw byte-store access with no attribution or MPU checks. Throws
// std::out_of_range for addresses outside physical memory.
Word peek32(const MachineState& s, Word addr);
void poke32(MachineState& s, Word addr, Word value);

enum class Access : std::uint8_t { Read, Write, Exec };

// Attribution + NS-MPU check for a 4-byte access by `world`.
std::optional<Fault> check_access(const MachineState& s, Word addr, Access a,
                                  World world);
Perms effective_ns_perms(const MachineState& s, Word addr);

// Checked accesses; register pages (ITNS, NS-MPU, timer) are decoded here.
std::optional<Fault> bus_read(MachineState& s, Word addr, World world,
                              Word& out);
std::optional<Fault> bus_write(MachineState& s, Word addr, World world,
                               Word value);

class SecureMonitor {
 public:
  virtual ~SecureMonitor() = default;
  // Runs secure service `service` for the NSC_CALL at s.pc - 4. On entry
  // s.world is Secure and s.pc already points past the gateway; the monitor
  // sets pc/world/lr for the resume point or halts the machine.
  virtual std::optional<Fault> on_gateway(MachineState& s, Word service) = 0;
};

enum class TraceEvent : std::uint8_t { Retire, IrqEntry, ExcReturn, Fault, Halt };

struct TraceRecord {
  std::uint64_t retired = 0;
  Word pc = 0;
  World world = World::NonSecure;
  TraceEvent event = TraceEvent::Retire;
  Word insn = 0;  // raw instruction word for Retire records
  int irq = -1;   // IrqEntry only

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;

std::optional<Fault> step(MachineState& s, SecureMonitor* monitor,
                          Trace* trace = nullptr);

enum class StopReason : std::uint8_t { Halted, Faulted, StepLimit };

struct RunResult {
  StopReason reason = StopReason::StepLimit;
  std::optional<Fault> fault;
  Trace trace;
  std::uint64_t steps = 0;
};

// Steps until HALT (or a monitor-initiated halt), a fault, or `max_steps`.
// Throws std::invalid_argument when max_steps is zero.
RunResult run(MachineState& s, SecureMonitor* monitor, std::uint64_t max_steps,
              bool record_trace = true);

void pend_irq(MachineState& s, int irq);
void arm_timer(MachineState& s, Word fire_after, int irq, Word reload = 0);

std::optional<Fault> check_interrupts(MachineState& s, Trace* trace = nullptr);
std::optional<Fault> exec_return(MachineState& s, Trace* trace = nullptr);

// Programs NS-MPU slot `slot` through the memory-mapped register page as
// `caller` would. NonSecure callers fault once the SAU has made the page
// Secure.
std::optional<Fault> configure_mpu(MachineState& s, World caller,
                                   std::size_t slot, const MpuRule& rule);
std::optional<Fault> set_itns(MachineState& s, World caller, int irq,
                              World target);

// SAU reprogramming is a Secure-only native operation.
void sau_set_attribution(MachineState& s, Word region_base, Attribution a);

void load_words(MachineState& s, Word base, const std::vector<Word>& words);

std::string_view world_name(World w);
std::string_view event_name(TraceEvent e);
void write_trace(std::ostream& os, const Trace& trace);

}  // namespace iscflat::vm
