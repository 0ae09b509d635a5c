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
#include <optional>
#include <string>
#include <vector>

#include "arm/auel.hpp"
#include "arm/backbone.hpp"
#include "arm/config.hpp"
#include "arm/graph.hpp"
#include "arm/module.hpp"
#include "arm/moe.hpp"

namespace arm {

/// The full forecaster: AUEL statistics and MoE horizon initialisation,
/// the MKLS-wrapped Transformer, and AUEL refinement plus inverse. Each
/// stage is present only when its config switch is on.
class ArmModel {
 public:
  ArmModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  ParameterStore& parameters() noexcept { return params_; }
  const ParameterStore& parameters() const noexcept { return params_; }

  bool has_distribution() const noexcept { return auel_.has_value(); }
  bool has_temporal() const noexcept { return moe_init_.has_value(); }
  const Auel* auel() const noexcept { return auel_ ? &*auel_ : nullptr; }
  const Moe* moe_init() const noexcept { return moe_init_ ? &*moe_init_ : nullptr; }
  const Moe* moe_refine() const noexcept { return moe_refine_ ? &*moe_refine_ : nullptr; }
  const Backbone& backbone() const noexcept { return backbone_; }

  /// Forecast (L_P x C) for one lookback block (L_I x C). `g` must be bound
  /// to this model's parameters.
  Var forward(Graph& g, const Tensor& input, const ForwardContext& ctx) const;
  /// Evaluation-mode forecast.
  Tensor predict(const Tensor& input) const;

  /// Keeps constrained parameters valid; call after every optimizer step.
  void clamp_parameters();

  /// Copies values by name; every parameter must be present with its shape.
  void load_parameters(const std::vector<std::pair<std::string, Tensor>>& arrays);

 private:
  ArmModel(const ModelConfig& config, Rng&& init);

  ModelConfig config_;
  ParameterStore params_;
  std::optional<Auel> auel_;
  std::optional<Moe> moe_init_, moe_refine_;
  Backbone backbone_;
};

}  // namespace arm
