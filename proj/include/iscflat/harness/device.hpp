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

// A simulated prover device: one machine, the secure firmware, the deployed
// App image and the NS interrupt handlers. Each attestation boots a fresh
// machine, so sessions never observe each other's state; the firmware (and
// with it the single active attestation instance) persists across them.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "iscflat/cfg/instrument.hpp"
#include "iscflat/secure/runtime.hpp"
#include "iscflat/vm/machine.hpp"

namespace iscflat::harness {

struct DeviceImage {
  secure::AppId app_id{};
  vm::Program app;            // image deployed in the App code region
  cfg::AddressMap addr_map;   // empty when `app` carries no gates
  std::vector<vm::Program> isrs;
  std::map<int, int> priority;
  // (retired instructions after App start, irq); strictly increasing.
  std::vector<std::pair<std::uint64_t, int>> schedule;
  secure::RuntimeConfig runtime;
};

enum class AttestStatus : std::uint8_t {
  Reported,
  Busy,
  UnknownApp,
  Refused,
  Faulted,
  Timeout,
};

std::string_view attest_status_name(AttestStatus s);

struct AttestOutcome {
  AttestStatus status = AttestStatus::Timeout;
  std::optional<secure::Report> report;
  std::optional<vm::Fault> fault;
  std::string detail;
  vm::Trace trace;
  std::uint64_t app_start = 0;  // retired count when the App was entered
  std::uint64_t steps = 0;
};

class Device {
 public:
  Device(DeviceImage image, secure::KeyPair keys);

  vm::MachineState& state() { return state_; }
  const vm::MachineState& state() const { return state_; }
  secure::SecureRuntime& runtime() { return runtime_; }
  const DeviceImage& image() const { return image_; }

  // Fresh machine with firmware, App and ISRs loaded. Leaves the runtime's
  // attestation instance alone.
  void boot();

  // Boots and runs ism_initialize. Busy leaves the running session intact.
  secure::InitStatus begin(const secure::Challenge& chl);
  // Advances an attestation begun with begin(); returns nullopt while the
  // App is still running after `steps` more instructions.
  std::optional<AttestOutcome> advance(std::uint64_t steps, bool record_trace);
  // Abandons the current session (timeout or transport loss).
  AttestOutcome abandon(AttestStatus why, std::string detail);

  // begin + advance until completion or `max_steps`.
  AttestOutcome attest(const secure::Challenge& chl, std::uint64_t max_steps,
                       bool record_trace = true);

 private:
  AttestOutcome finish(AttestOutcome out);

  DeviceImage image_;
  secure::SecureRuntime runtime_;
  vm::MachineState state_;
  vm::Trace trace_;
  std::uint64_t app_start_ = 0;
  std::uint64_t steps_ = 0;
};

}  // namespace iscflat::harness
