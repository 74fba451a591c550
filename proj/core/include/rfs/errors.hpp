/* Copyright 2026 The RFS Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace rfs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not line up for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by a forward op, or a loss diverged during training.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed, truncated or inconsistent files and benchmark data.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SamplingInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Raised by the finite-difference oracle when the probed function is not finite.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace rfs
