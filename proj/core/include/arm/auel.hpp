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

#include <cstddef>
#include <vector>

#include "arm/config.hpp"
#include "arm/graph.hpp"
#include "arm/module.hpp"

namespace arm {

class Moe;

/// Per-sample output-distribution statistics, each 1 x C.
struct SampleStats {
  Var mean;   // EMA mean E
  Var scale;  // multi-window std S
};

/// Adaptive univariate effect learning: learnable per-series EMA mean,
/// multi-window std and affine map applied around the forecaster, with MoE
/// horizon initialisation and refinement.
///
/// Parameters (C series, k windows):
///   auel.alpha          1 x C   EMA decay
///   auel.window_weights C x k   p, one row per series
///   auel.gamma          1 x C
///   auel.beta           1 x C
class Auel {
 public:
  static constexpr double kAlphaMin = 1e-4;
  static constexpr double kAlphaMax = 1.0 - 1e-4;
  static constexpr double kWeightSumMin = 1e-6;
  static constexpr double kGammaMin = 1e-4;

  Auel(ParameterStore& params, const ModelConfig& config);

  const std::vector<std::size_t>& windows() const noexcept { return windows_; }
  double eps() const noexcept { return eps_; }
  ParamId alpha_id() const noexcept { return alpha_; }
  ParamId window_weights_id() const noexcept { return weights_; }
  ParamId gamma_id() const noexcept { return gamma_; }
  ParamId beta_id() const noexcept { return beta_; }

  /// E and S of the lookback block xI (L_I x C).
  SampleStats stats(Graph& g, Var input) const;
  /// gamma * (x - E) / (S + eps) + beta, per column.
  Var preprocess(Graph& g, Var x, const SampleStats& stats) const;
  /// ((x - beta) / gamma) * (S + eps) + E, per column.
  Var inverse_affine(Graph& g, Var x, const SampleStats& stats) const;

  /// Projects the parameters back into their valid region after an update.
  void clamp_params(ParameterStore& params) const;

 private:
  std::vector<std::size_t> windows_;
  double eps_;
  ParamId alpha_, weights_, gamma_, beta_;
};

/// In-place clamp of raw AUEL parameter tensors; the ranges are the
/// Auel::k* constants. A series whose weights sum below the floor has its
/// weights reset to equal values summing to the floor.
void clamp_auel_params(Tensor& alpha, Tensor& window_weights, Tensor& gamma);

/// Replaces the horizon rows of the normalised block (L_I + L_P) x C with the
/// MoE prediction (zero residual); the input rows are kept as they are.
Var init_horizon(Graph& g, Var normalized, std::size_t input_len, const Moe& moe,
                 const ForwardContext& ctx);

/// MoE([input rows | x_ed]) + x_ed, computed per series. `normalized_input`
/// is L_I x C, `x_ed` is L_P x C.
Var refine_forecast(Graph& g, Var normalized_input, Var x_ed, const Moe& moe,
                    const ForwardContext& ctx);

}  // namespace arm
