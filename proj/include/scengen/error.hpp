// Copyright 2026 The scengen Authors
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

#ifndef SCENGEN_ERROR_HPP
#define SCENGEN_ERROR_HPP

#include <stdexcept>

namespace scengen {

/// Invalid user input: schema violations, grammar errors, precondition
/// failures. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Runtime or numerical failure: factorization breakdown, exhausted
/// rejection budgets, failed simulation backends. Maps to CLI exit code 2.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace scengen

#endif  // SCENGEN_ERROR_HPP
