// Copyright 2026 The squeezesim Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace squeezesim {

/// A precondition on an argument was violated (range, sign, size).
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The inputs are well formed but the requested quantity does not exist:
/// all-zero couplings, zero variance, singular fits.
class DegenerateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require(bool condition, const char* message) {
  if (!condition) throw InvalidParameter(message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidParameter(message);
}

}  // namespace detail
}  // namespace squeezesim
