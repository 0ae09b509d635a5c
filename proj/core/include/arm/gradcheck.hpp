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

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "arm/graph.hpp"

namespace arm {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor of the relative error, so entries whose true gradient
  /// is ~0 are judged on absolute error instead.
  double abs_floor = 1e-5;
};

enum class GradCheckStatus { kPass, kFail, kSkippedNonSmooth };

struct GradCheckReport {
  std::string name;
  GradCheckStatus status = GradCheckStatus::kPass;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::string worst;  // "<leaf>[index]" of the largest error

  bool passed() const noexcept { return status == GradCheckStatus::kPass; }
  std::string summary() const;
};

/// Builds a graph from the given leaves and returns its output. Non-scalar
/// outputs are contracted with a fixed random projection before checking.
using LeafProgram = std::function<Var(Graph&, const std::vector<Var>& leaves)>;
/// Builds a graph that reads parameters through Graph::param.
using ParamProgram = std::function<Var(Graph&)>;

/// Central-difference check of the gradient of `program` w.r.t. every leaf
/// at `point`. Coordinates whose perturbation flips a recorded discrete
/// decision are skipped and the report is flagged non-smooth.
GradCheckReport check_gradients(std::string name, const LeafProgram& program,
                                std::vector<Tensor> point, const GradCheckOptions& options = {});

/// Same check w.r.t. the parameters of `params` whose names start with any
/// of `prefixes` (all parameters when empty). Values are restored on exit.
GradCheckReport check_parameter_gradients(std::string name, ParameterStore& params,
                                          const ParamProgram& program,
                                          const std::vector<std::string>& prefixes = {},
                                          const GradCheckOptions& options = {});

/// Names of the primitives known to `check_op`.
std::vector<std::string> checkable_ops();
/// Checks a named primitive at a random point drawn from `seed`.
GradCheckReport check_op(std::string_view op, std::uint64_t seed,
                         const GradCheckOptions& options = {});
/// Checks a named primitive at an explicit point (one tensor per operand).
GradCheckReport check_op(std::string_view op, std::vector<Tensor> point,
                         const GradCheckOptions& options = {});

}  // namespace arm
