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
#include <string>
#include <string_view>
#include <vector>

#include "arm/config.hpp"
#include "arm/gradcheck.hpp"

namespace arm {

/// Modules accepted by check_module: tensor, auel, moe, mkls, backbone, all.
std::vector<std::string> checkable_modules();

/// The small configuration used for module gradient checks
/// (L_I = 8, L_P = 4, C = 3, d = 4, two heads, every switch on).
ModelConfig toy_model_config();

/// Finite-difference checks of one module's parameters inside the full
/// model at toy size, from randomised parameters and input drawn from
/// `seed`. "tensor" checks every primitive instead. Each parameter group
/// is checked in evaluation mode and, where the module has dropout, in
/// training mode with a fixed mask.
std::vector<GradCheckReport> check_module(std::string_view module, std::uint64_t seed = 1,
                                          const GradCheckOptions& options = {});

}  // namespace arm
