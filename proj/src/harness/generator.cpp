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

#include "iscflat/harness/generator.hpp"

#include <sstream>

namespace iscflat::harness {

namespace {

// Registers the App computes with. R8 carries function pointers, R9 the
// data pointer.
constexpr const char* kWork[] = {"R4", "R5", "R6", "R7"};
constexpr const char* kConds[] = {"EQ", "NE", "LT", "GE", "GT", "LE", "LO", "HS"};

int pick(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

void alu(Rng& rng, std::ostringstream& os, int count) {
  for (int i = 0; i < count; ++i) {
    const char* rd = kWork[rng.below(4)];
    switch (rng.below(5)) {
      case 0: os << "    ADD " << rd << ", #" << pick(rng, 1, 50) << "\n"; break;
      case 1: os << "    SUB " << rd << ", #" << pick(rng, 1, 50) << "\n"; break;
      case 2: os << "    ADD " << rd << ", " << kWork[rng.below(4)] << "\n"; break;
      case 3: os << "    MOV " << rd << ", #" << pick(rng, 0, 200) << "\n"; break;
      default:
        os << "    STORE " << rd << ", [R9, #" << 4 * pick(rng, 0, 15) << "]\n";
        break;
    }
  }
}

}  // namespace

GeneratedApp generate_app(Rng& rng, const GenOptions& opt) {
  GeneratedApp g;
  g.blocks = pick(rng, opt.min_blocks, opt.max_blocks);
  g.functions = pick(rng, 1, opt.max_functions);
  std::ostringstream os;
  os << ".entry main\nmain:\n    PUSH LR\n    MOV R9, #APP_DATA\n";
  for (const char* r : kWork) os << "    MOV " << r << ", #" << pick(rng, 0, 100) << "\n";

  for (int b = 0; b < g.blocks; ++b) {
    os << "b" << b << ":\n";
    alu(rng, os, pick(rng, 1, 4));
    const std::string fwd = "b" + std::to_string(pick(rng, b + 1, g.blocks));
    switch (rng.below(6)) {
      case 0:
        os << "    CMP " << kWork[rng.below(4)] << ", #" << pick(rng, 0, 150) << "\n"
           << "    B" << kConds[rng.below(8)] << " " << fwd << "\n";
        break;
      case 1:
        os << "    BL f" << rng.below(static_cast<std::uint64_t>(g.functions)) << "\n";
        break;
      case 2:
        os << "    MOV R8, #f" << rng.below(static_cast<std::uint64_t>(g.functions)) << "\n"
           << "    BLX R8\n";
        break;
      case 3:
        os << "    MOV R3, #" << pick(rng, 1, 4) << "\n"
           << "l" << b << ":\n";
        alu(rng, os, pick(rng, 0, 2));
        os << "    SUB R3, #1\n    CMP R3, #0\n    BNE l" << b << "\n";
        break;
      case 4:
        os << "    B " << fwd << "\n";
        break;
      default:
        break;
    }
  }
  os << "b" << g.blocks << ":\n    MOV R0, R4\n    POP LR\n    RET\n";

  for (int f = 0; f < g.functions; ++f) {
    os << "\nf" << f << ":\n";
    const bool calls = f + 1 < g.functions && rng.below(3) == 0;
    if (calls) os << "    PUSH LR\n";
    alu(rng, os, pick(rng, 1, 3));
    if (rng.below(2) == 0) {
      os << "    CMP " << kWork[rng.below(4)] << ", #" << pick(rng, 0, 150) << "\n"
         << "    B" << kConds[rng.below(8)] << " f" << f << "_tail\n";
      alu(rng, os, pick(rng, 1, 2));
    }
    os << "f" << f << "_tail:\n";
    alu(rng, os, pick(rng, 0, 2));
    if (calls) {
      os << "    BL f" << pick(rng, f + 1, g.functions - 1) << "\n    POP LR\n";
    }
    os << "    RET\n";
  }
  g.source = os.str();
  return g;
}

std::string generate_isr(Rng& rng, int irq, int body_len,
                         const std::string& label) {
  std::ostringstream os;
  os << ".ivt " << irq << " " << label << "\n" << label << ":\n"
     << "    MOV R1, #ISR_DATA+" << 16 * irq << "\n";
  int left = body_len;
  while (left > 0) {
    if (left >= 2 && rng.below(4) == 0) {
      os << "    PUSH R2\n    POP R2\n";
      left -= 2;
      continue;
    }
    switch (rng.below(3)) {
      case 0: os << "    ADD R0, #" << pick(rng, 1, 9) << "\n"; break;
      case 1: os << "    LOAD R2, [R1, #" << 4 * pick(rng, 0, 3) << "]\n"; break;
      default: os << "    STORE R0, [R1, #" << 4 * pick(rng, 0, 3) << "]\n"; break;
    }
    --left;
  }
  os << "    RET\n";
  return os.str();
}

}  // namespace iscflat::harness
