// Copyright 2026 The driftgp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRIFTGP_ERROR_HPP
#define DRIFTGP_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace driftgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: shape mismatches, empty inputs, out-of-domain values.
class InputError : public Error {
 public:
  using Error::Error;
};

// Hyperparameters outside their descriptor bounds.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Factorization failure or non-finite intermediate results.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Rank-one expansion denominator below the stability floor. The caller is
// expected to rebuild the inverse from scratch.
class StabilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class InsufficientHistoryError : public Error {
 public:
  using Error::Error;
};

// R^2 requested on targets with zero variance.
class UndefinedVarianceError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t row)
      : InputError(what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace driftgp

#endif  // DRIFTGP_ERROR_HPP
