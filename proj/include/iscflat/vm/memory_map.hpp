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

// Fixed physical memory map of the simulated device. Every address fits in
// an 18-bit immediate so programs can materialize any of them with one MOV.
//
//   0x00000  secure code            S    r-x
//   0x01000  secure data            S    rw-
//   0x02000  NSC gateway veneers    NSC  r-x
//   0x03000  secure IVT             S    rw-
//   0x03400  ITNS register page     S    rw-
//   0x03800  NS-MPU register page   NS   rw-  (SAU may flip it to S)
//   0x03C00  timer register page    NS   rw-
//   0x04000  non-secure IVT         NS   rw-
//   0x08000  application code       NS   rwx
//   0x10000  other NS code (ISRs)   NS   rwx
//   0x14000  NS data                NS   rw-
//   0x18000  NS stack               NS   rw-
//   0x1C000  secure stack           S    rw-

#pragma once

#include <cstddef>

#include "iscflat/vm/isa.hpp"

namespace iscflat::vm::mem {

inline constexpr Word kSecureCodeBase = 0x00000;
inline constexpr Word kSecureCodeSize = 0x1000;
inline constexpr Word kSecureDataBase = 0x01000;
inline constexpr Word kSecureDataSize = 0x1000;
inline constexpr Word kNscBase = 0x02000;
inline constexpr Word kNscSize = 0x100;
inline constexpr Word kSecureIvtBase = 0x03000;
inline constexpr Word kIvtSize = 0x100;
inline constexpr Word kItnsBase = 0x03400;
inline constexpr Word kMpuBase = 0x03800;
inline constexpr Word kTimerBase = 0x03C00;
inline constexpr Word kRegPageSize = 0x100;
inline constexpr Word kNsIvtBase = 0x04000;
inline constexpr Word kAppCodeBase = 0x08000;
inline constexpr Word kAppCodeSize = 0x8000;
inline constexpr Word kOtherCodeBase = 0x10000;
inline constexpr Word kOtherCodeSize = 0x4000;
inline constexpr Word kNsDataBase = 0x14000;
inline constexpr Word kNsDataSize = 0x4000;
inline constexpr Word kNsStackBase = 0x18000;
inline constexpr Word kNsStackSize = 0x4000;
inline constexpr Word kNsStackTop = kNsStackBase + kNsStackSize;
inline constexpr Word kSecureStackBase = 0x1C000;
inline constexpr Word kSecureStackSize = 0x1000;
inline constexpr Word kSecureStackTop = kSecureStackBase + kSecureStackSize;
inline constexpr Word kMemorySize = 0x1D000;

// Application data is the low half of NS data, ISR scratch the high half.
inline constexpr Word kAppDataBase = kNsDataBase;
inline constexpr Word kIsrDataBase = kNsDataBase + 0x2000;

// NSC veneers installed by the secure firmware.
inline constexpr Word kGateEntry = kNscBase + 0x00;
inline constexpr Word kGateDest = kNscBase + 0x04;
inline constexpr Word kDispatcherExitGate = kNscBase + 0x08;
inline constexpr Word kFinalizeGate = kNscBase + 0x0C;

// Secure-side stub every secure IVT entry points at while attesting.
inline constexpr Word kDispatcherStub = kSecureCodeBase;

// Sentinel loaded into LR on exception entry; branching to it while in
// Handler mode performs exception return.
inline constexpr Word kExecReturn = 0xFFFFFFFFu;

inline constexpr int kIrqCount = 16;
inline constexpr int kMpuSlots = 8;

// NS-MPU register page: slot i occupies 16 bytes at kMpuBase + 16*i.
inline constexpr Word kMpuSlotStride = 16;
inline constexpr Word kMpuRegBase = 0x0;
inline constexpr Word kMpuRegLimit = 0x4;
inline constexpr Word kMpuRegAttr = 0x8;
inline constexpr Word kMpuAttrRead = 1u << 0;
inline constexpr Word kMpuAttrWrite = 1u << 1;
inline constexpr Word kMpuAttrExec = 1u << 2;
inline constexpr Word kMpuAttrEnable = 1u << 31;

// Timer register page.
inline constexpr Word kTimerCount = 0x0;   // write N: fire after N retires
inline constexpr Word kTimerIrq = 0x4;
inline constexpr Word kTimerReload = 0x8;

// Exception frame: 8 words pushed on entry, lowest address first.
inline constexpr int kFrameWords = 8;
inline constexpr Word kFrameBytes = kFrameWords * 4;
inline constexpr Word kFramePcOffset = 24;

}  // namespace iscflat::vm::mem
