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

// Exception types for input and configuration errors. Runtime outcomes
// (faults, verdicts, decode errors) are values, not exceptions.

#pragma once

#include <stdexcept>
#include <string>

namespace iscflat {

class MalformedProgram : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RelocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownAddress : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace iscflat
