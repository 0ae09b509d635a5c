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

#include <vector>

#include "arm/errors.hpp"
#include "arm/graph.hpp"
#include "arm/rng.hpp"

namespace arm {

/// Per-call settings shared by every module's forward pass.
struct ForwardContext {
  bool training = false;
  /// Source for dropout and kernel dropout; required when training.
  Rng* rng = nullptr;
  /// Auxiliary loss terms (MoE load balancing) are appended here when set.
  std::vector<Var>* aux_losses = nullptr;

  Rng& random() const {
    if (rng == nullptr) throw GraphError("training-mode forward pass needs an Rng");
    return *rng;
  }
};

}  // namespace arm
