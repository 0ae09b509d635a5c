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

#include "arm/auel.hpp"

#include <algorithm>
#include <cmath>

#include "arm/errors.hpp"
#include "arm/moe.hpp"
#include "arm/ops.hpp"

namespace arm {

Auel::Auel(ParameterStore& params, const ModelConfig& config)
    : windows_(resolved_windows(config)), eps_(config.auel.eps) {
  const std::size_t c = config.channels;
  const std::size_t k = windows_.size();
  if (c == 0) throw ConfigError("auel: channel count must be positive");
  for (std::size_t w : windows_) {
    if (w < 2 || w > config.input_len)
      throw ConfigError("auel: window " + std::to_string(w) + " outside [2, " +
                        std::to_string(config.input_len) + "]");
  }
  alpha_ = params.add("auel.alpha", Tensor::matrix(1, c, config.auel.alpha_init));
  weights_ = params.add("auel.window_weights", Tensor::matrix(c, k, 1.0 / static_cast<double>(k)));
  gamma_ = params.add("auel.gamma", Tensor::matrix(1, c, 1.0));
  beta_ = params.add("auel.beta", Tensor::matrix(1, c, 0.0));
}

SampleStats Auel::stats(Graph& g, Var input) const {
  Var mean = ops::ema_mean(input, g.param(alpha_));
  std::vector<Var> stds;
  stds.reserve(windows_.size());
  for (std::size_t w : windows_) stds.push_back(ops::window_std(input, w));
  Var p = ops::transpose(g.param(weights_));  // k x C
  Var scale = ops::sum_rows(ops::concat_rows(stds) * p) / ops::sum_rows(p);
  return {mean, scale};
}

Var Auel::preprocess(Graph& g, Var x, const SampleStats& stats) const {
  const std::size_t l = x.rows();
  Var centred = x - ops::broadcast_rows(stats.mean, l);
  Var scaled = centred / ops::broadcast_rows(stats.scale + eps_, l);
  return scaled * ops::broadcast_rows(g.param(gamma_), l) +
         ops::broadcast_rows(g.param(beta_), l);
}

Var Auel::inverse_affine(Graph& g, Var x, const SampleStats& stats) const {
  const std::size_t l = x.rows();
  Var unshifted = (x - ops::broadcast_rows(g.param(beta_), l)) /
                  ops::broadcast_rows(g.param(gamma_), l);
  return unshifted * ops::broadcast_rows(stats.scale + eps_, l) +
         ops::broadcast_rows(stats.mean, l);
}

void Auel::clamp_params(ParameterStore& params) const {
  clamp_auel_params(params.value(alpha_), params.value(weights_), params.value(gamma_));
}

void clamp_auel_params(Tensor& alpha, Tensor& window_weights, Tensor& gamma) {
  for (double& a : alpha.values()) a = std::clamp(a, Auel::kAlphaMin, Auel::kAlphaMax);
  const std::size_t k = window_weights.cols();
  for (std::size_t i = 0; i < window_weights.rows(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double& p = window_weights(i, j);
      if (p < 0.0) p = 0.0;
      total += p;
    }
    if (total < Auel::kWeightSumMin) {
      for (std::size_t j = 0; j < k; ++j)
        window_weights(i, j) = Auel::kWeightSumMin / static_cast<double>(k);
    }
  }
  for (double& v : gamma.values()) {
    if (std::abs(v) < Auel::kGammaMin) v = std::signbit(v) ? -Auel::kGammaMin : Auel::kGammaMin;
  }
}

Var init_horizon(Graph& g, Var normalized, std::size_t input_len, const Moe& moe,
                 const ForwardContext& ctx) {
  const std::size_t total = normalized.rows();
  if (total != moe.in_width() || input_len >= total) {
    throw ShapeError("init_horizon: block " + to_string(normalized.shape()) +
                     " does not match MoE input width " + std::to_string(moe.in_width()));
  }
  const std::size_t horizon = total - input_len;
  if (moe.out_width() != horizon) {
    throw ShapeError("init_horizon: MoE produces " + std::to_string(moe.out_width()) +
                     " steps, horizon needs " + std::to_string(horizon));
  }
  const std::size_t c = normalized.cols();
  Var series = ops::transpose(normalized);  // C x (L_I + L_P)
  Var zero = g.constant(Tensor::matrix(c, horizon));
  Var predicted = moe.forward(g, series, zero, ctx);
  return ops::concat_rows({ops::slice_rows(normalized, 0, input_len), ops::transpose(predicted)});
}

Var refine_forecast(Graph& g, Var normalized_input, Var x_ed, const Moe& moe,
                    const ForwardContext& ctx) {
  if (normalized_input.cols() != x_ed.cols() ||
      normalized_input.rows() + x_ed.rows() != moe.in_width() || x_ed.rows() != moe.out_width()) {
    throw ShapeError("refine_forecast: input " + to_string(normalized_input.shape()) +
                     " and forecast " + to_string(x_ed.shape()) + " do not fit the MoE");
  }
  Var forecast = ops::transpose(x_ed);  // C x L_P
  Var series = ops::concat_cols({ops::transpose(normalized_input), forecast});
  return ops::transpose(moe.forward(g, series, forecast, ctx));
}

}  // namespace arm
