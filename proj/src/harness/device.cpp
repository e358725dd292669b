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

#include "iscflat/harness/device.hpp"

#include <array>

namespace iscflat::harness {

namespace {

constexpr std::array<std::string_view, 6> kStatusNames = {
    "Reported", "Busy", "UnknownApp", "Refused", "Faulted", "Timeout"};

secure::AppRecord app_record(const DeviceImage& img) {
  secure::AppRecord r;
  r.id = img.app_id;
  r.base = img.app.base;
  r.size = static_cast<vm::Word>(img.app.code.size() * 4);
  r.entry = img.app.entry;
  r.addr_map = img.addr_map;
  return r;
}

}  // namespace

std::string_view attest_status_name(AttestStatus s) {
  return kStatusNames[static_cast<std::size_t>(s)];
}

Device::Device(DeviceImage image, secure::KeyPair keys)
    : image_(std::move(image)),
      runtime_(std::move(keys), image_.runtime) {
  runtime_.register_app(app_record(image_));
  boot();
}

void Device::boot() {
  state_ = vm::make_machine();
  runtime_.install(state_);
  vm::load_words(state_, image_.app.base, image_.app.code);
  for (const vm::Program& isr : image_.isrs) {
    vm::load_words(state_, isr.base, isr.code);
    for (const auto& [irq, addr] : isr.ivt) {
      vm::poke32(state_, vm::mem::kNsIvtBase + 4 * static_cast<vm::Word>(irq),
                 addr);
    }
  }
  for (const auto& [irq, prio] : image_.priority) {
    state_.nvic.priority.at(static_cast<std::size_t>(irq)) = prio;
  }
  trace_.clear();
  steps_ = 0;
}

secure::InitStatus Device::begin(const secure::Challenge& chl) {
  if (runtime_.instance().active) return secure::InitStatus::Busy;
  boot();
  const secure::InitStatus st =
      runtime_.ism_initialize(state_, chl, image_.app_id);
  if (st != secure::InitStatus::Ok) return st;
  app_start_ = state_.retired;
  for (const auto& [after, irq] : image_.schedule) {
    state_.schedule.push_back({app_start_ + after, irq});
  }
  return st;
}

std::optional<AttestOutcome> Device::advance(std::uint64_t steps,
                                             bool record_trace) {
  vm::RunResult r = vm::run(state_, &runtime_, steps, record_trace);
  steps_ += r.steps;
  if (record_trace) {
    trace_.insert(trace_.end(), r.trace.begin(), r.trace.end());
  }
  AttestOutcome out;
  switch (r.reason) {
    case vm::StopReason::StepLimit:
      return std::nullopt;
    case vm::StopReason::Faulted:
      out.status = AttestStatus::Faulted;
      out.fault = r.fault;
      out.detail = std::string(vm::fault_name(r.fault->kind)) + ": " +
                   r.fault->detail;
      return finish(std::move(out));
    case vm::StopReason::Halted:
      break;
  }
  const auto& fin = runtime_.last_finalize();
  if (state_.halted == vm::HaltReason::Finalized && fin &&
      std::holds_alternative<secure::Report>(*fin)) {
    out.status = AttestStatus::Reported;
    out.report = std::get<secure::Report>(*fin);
    out.detail = "report produced";
  } else if (state_.halted == vm::HaltReason::Refused && fin) {
    out.status = AttestStatus::Refused;
    out.detail = std::get<secure::Refused>(*fin).reason;
  } else {
    out.status = AttestStatus::Refused;
    out.detail = "App halted without reaching finalization";
  }
  return finish(std::move(out));
}

AttestOutcome Device::abandon(AttestStatus why, std::string detail) {
  AttestOutcome out;
  out.status = why;
  out.detail = std::move(detail);
  return finish(std::move(out));
}

AttestOutcome Device::finish(AttestOutcome out) {
  runtime_.ism_abort(state_);
  out.trace = std::move(trace_);
  trace_.clear();
  out.app_start = app_start_;
  out.steps = steps_;
  return out;
}

AttestOutcome Device::attest(const secure::Challenge& chl,
                             std::uint64_t max_steps, bool record_trace) {
  const secure::InitStatus st = begin(chl);
  if (st != secure::InitStatus::Ok) {
    AttestOutcome out;
    out.status = st == secure::InitStatus::Busy ? AttestStatus::Busy
                                                : AttestStatus::UnknownApp;
    out.detail = st == secure::InitStatus::Busy ? "attestation in progress"
                                                : "unknown app_id";
    return out;
  }
  if (auto done = advance(max_steps, record_trace)) return std::move(*done);
  return abandon(AttestStatus::Timeout,
                 "no report after " + std::to_string(max_steps) +
                     " instructions");
}

}  // namespace iscflat::harness
