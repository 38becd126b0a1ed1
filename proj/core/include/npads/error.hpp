// core/include/npads/error.hpp

// Copyright 2026  The npads Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace npads {

// Base of all library errors. Subclasses map onto CLI exit codes:
// DataError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (bad WAV, dimension mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or infeasible numerical conditions.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Raised by the anomaly sampler when no candidate passes the acceptance
// test within the attempt budget.
class RejectionBudgetExhausted : public NumericalError {
 public:
  RejectionBudgetExhausted() : NumericalError("rejection budget exhausted") {}
};

}  // namespace npads
