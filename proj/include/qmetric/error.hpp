// Copyright 2026 The qmetric Authors
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

namespace qmetric {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live on different algebra shapes, or a matrix does not fit its shape.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// A matrix has nonzero entries outside the block support of its algebra.
class SupportViolation : public Error {
 public:
  using Error::Error;
};

/// Input expected to be self-adjoint is not, beyond tolerance.
class NotSelfAdjoint : public Error {
 public:
  using Error::Error;
};

/// An operation's precondition does not hold (bad parameter, unverified metric, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmetric
