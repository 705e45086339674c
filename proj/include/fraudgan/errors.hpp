/*
 * Copyright 2026 The fraudgan Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace fraudgan {

// Error taxonomy. The CLI maps these onto its exit codes:
//   ParameterError, ContractError -> 2 (configuration)
//   DataError                     -> 3 (data)
//   NumericalError                -> 4 (numerical failure)
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible matrix shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// API misuse, e.g. calling backward twice on the same tape.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid user-facing parameter (k too large, unknown method name, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or an out-of-domain argument (log of a negative number).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A training loss became non-finite.
class TrainingDivergence : public NumericalError {
 public:
  TrainingDivergence(const std::string& what, std::size_t iteration)
      : NumericalError(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace fraudgan
