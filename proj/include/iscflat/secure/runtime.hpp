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

// Secure-world firmware: CFA engine, interrupt-safe measurement (ISM)
// initialization, dispatcher and finalization.
//
// The runtime is native code behind NSC_CALL. install() writes the gateway
// veneers into the NSC region:
//
//   GATE_ENTRY       NSC_CALL #LogEntry     logs the caller's return address
//   GATE_DEST        NSC_CALL #LogDest      pops and logs a destination
//   DISPATCHER_EXIT  NSC_CALL #DispatchExit ISR return path
//   FINALIZE         NSC_CALL #Finalize     App's top-level return
//
// and the dispatcher stub (NSC_CALL #Dispatch) at the start of secure code,
// which every secure IVT entry points at. Logged values are translated back
// to original-image addresses through the registered App's address map.
//
// Baseline mode is the same engine with the dispatcher switched off: IRQs
// stay routed to the NS IVT, no stack lock, and the log is never gated.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "iscflat/cfg/instrument.hpp"
#include "iscflat/secure/crypto.hpp"
#include "iscflat/secure/report.hpp"
#include "iscflat/vm/machine.hpp"

namespace iscflat::secure {

using vm::Word;

enum class Service : Word {
  LogEntry = 1,
  LogDest = 2,
  Dispatch = 3,
  DispatchExit = 4,
  Finalize = 5,
};

enum class RuntimeMode : std::uint8_t { Baseline, IscFlat };

struct RuntimeConfig {
  RuntimeMode mode = RuntimeMode::IscFlat;
  std::size_t cflog_capacity_bytes = 4096;
  std::size_t max_dispatch_depth = 8;
  // Bind R0 at finalization as the 4-byte LE result `out`.
  bool bind_output = false;
};

// Identifies the attested code region and how to express logged addresses
// in original-image terms.
struct AppRecord {
  AppId id{};
  Word base = vm::mem::kAppCodeBase;
  Word size = 0;  // bytes
  Word entry = vm::mem::kAppCodeBase;
  cfg::AddressMap addr_map;  // empty: values are logged unchanged
};

struct CfLog {
  std::vector<Word> entries;
  std::size_t capacity_bytes = 4096;
  bool overflowed = false;

  // False (and overflowed set) when the entry does not fit.
  bool append(Word v);
};

struct SavedConfig {
  std::array<vm::World, vm::mem::kIrqCount> itns{};
  std::array<Word, vm::mem::kIrqCount> secure_ivt{};
  std::array<Word, vm::mem::kIrqCount> ns_ivt{};
  vm::MpuConfig mpu{};
  vm::Attribution mpu_page = vm::Attribution::NonSecure;
};

struct DispatcherFrame {
  bool saved_lac = false;
  Word saved_sp_c = 0;
  std::array<Word, vm::kGeneralRegs> regs{};
  Word lr = 0;
  Word gate_lr = 0;
  vm::Flags flags;
  vm::MpuConfig saved_mpu{};
  int irq = 0;
};

struct AttestationInstance {
  Challenge chl{};
  Digest h_app{};
  AppId app_id{};
  CfLog cflog;
  bool lac = false;
  Word sp0 = 0;
  bool active = false;
  bool poisoned = false;
  SavedConfig saved;
  std::vector<DispatcherFrame> frames;
};

enum class InitStatus : std::uint8_t { Ok, Busy, UnknownApp };

struct Refused {
  std::string reason;
};

using FinalizeResult = std::variant<Report, Refused>;

class SecureRuntime : public vm::SecureMonitor {
 public:
  SecureRuntime(KeyPair keys, RuntimeConfig config);

  const RuntimeConfig& config() const { return config_; }
  const PublicKey& public_key() const { return keys_.public_key(); }

  // Writes veneers, the dispatcher stub and the default secure IVT.
  void install(vm::MachineState& s) const;
  void register_app(AppRecord app);
  const AppRecord* find_app(const AppId& id) const;

  // Steps 1-8; on Ok the machine is positioned at the App entry in NS
  // Thread mode with LR = FINALIZE.
  InitStatus ism_initialize(vm::MachineState& s, const Challenge& chl,
                            const AppId& app_id);

  std::optional<vm::Fault> on_gateway(vm::MachineState& s,
                                      Word service) override;

  void log_gate(Word dest);
  std::optional<vm::Fault> dispatcher_entry(vm::MachineState& s, int irq);
  std::optional<vm::Fault> dispatcher_exit(vm::MachineState& s);
  FinalizeResult ism_finalize(vm::MachineState& s);
  // Drops an unfinished instance and restores the saved configuration.
  void ism_abort(vm::MachineState& s);

  const AttestationInstance& instance() const { return inst_; }
  // Report or refusal produced by the last FINALIZE gateway call.
  const std::optional<FinalizeResult>& last_finalize() const {
    return last_finalize_;
  }

 private:
  Word to_original(Word v) const;
  void restore_config(vm::MachineState& s) const;

  KeyPair keys_;
  RuntimeConfig config_;
  std::vector<AppRecord> apps_;
  std::optional<std::size_t> current_app_;
  AttestationInstance inst_;
  std::optional<FinalizeResult> last_finalize_;
};

}  // namespace iscflat::secure
