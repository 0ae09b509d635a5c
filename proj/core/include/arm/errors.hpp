//*****************************************************************************
// Copyright 2026 The ARM Forecasting Authors
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
//*****************************************************************************

#pragma once

#include <stdexcept>
#include <string>

namespace arm {

/// Operand shapes incompatible with an operation. The message names the op
/// and both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A forward pass produced NaN or Inf. The message names the first op whose
/// output went non-finite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid hyperparameters or configuration file contents.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (CSV, checkpoints, splits).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph misuse, e.g. backward on a graph with nothing recorded.
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace arm
