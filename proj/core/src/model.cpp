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

#include "arm/model.hpp"

#include <unordered_map>

#include "arm/errors.hpp"
#include "arm/ops.hpp"

namespace arm {
namespace {

ModelConfig checked(const ModelConfig& config) {
  validate(config);
  return config;
}

std::optional<Auel> make_auel(ParameterStore& params, const ModelConfig& config) {
  if (!config.auel.distribution) return std::nullopt;
  return Auel(params, config);
}

std::optional<Moe> make_moe(ParameterStore& params, const ModelConfig& config, const char* name,
                            Rng& init) {
  if (!config.auel.temporal) return std::nullopt;
  return Moe(params, name, config.total_len(), config.pred_len, config.moe, init);
}

}  // namespace

ArmModel::ArmModel(const ModelConfig& config, std::uint64_t seed) : ArmModel(config, Rng(seed)) {}

// parameters register in member order: AUEL, MoE init, MoE refine, backbone
ArmModel::ArmModel(const ModelConfig& config, Rng&& init)
    : config_(checked(config)),
      auel_(make_auel(params_, config_)),
      moe_init_(make_moe(params_, config_, "moe.init", init)),
      moe_refine_(make_moe(params_, config_, "moe.refine", init)),
      backbone_(params_, config_, init) {}

Var ArmModel::forward(Graph& g, const Tensor& input, const ForwardContext& ctx) const {
  if (g.parameters() != &params_)
    throw GraphError("ArmModel::forward: graph is bound to a different parameter store");
  const std::size_t li = config_.input_len, lp = config_.pred_len, c = config_.channels;
  if (input.rows() != li || input.cols() != c)
    throw ShapeError("ArmModel::forward: expected input [" + std::to_string(li) + "x" +
                     std::to_string(c) + "], got " + to_string(input.shape()));

  Var x_in = g.constant(input);
  Var block = ops::concat_rows({x_in, g.constant(Tensor::matrix(lp, c))});

  std::optional<SampleStats> stats;
  if (auel_) {
    stats = auel_->stats(g, x_in);
    block = auel_->preprocess(g, block, *stats);
  }
  Var normalized_input = ops::slice_rows(block, 0, li);
  if (moe_init_) block = init_horizon(g, block, li, *moe_init_, ctx);

  Var forecast = backbone_.forward(g, block, ctx);
  if (moe_refine_) forecast = refine_forecast(g, normalized_input, forecast, *moe_refine_, ctx);
  if (auel_) forecast = auel_->inverse_affine(g, forecast, *stats);
  return forecast;
}

Tensor ArmModel::predict(const Tensor& input) const {
  Graph g(&params_);
  return forward(g, input, ForwardContext{}).value();
}

void ArmModel::clamp_parameters() {
  if (auel_) auel_->clamp_params(params_);
}

void ArmModel::load_parameters(const std::vector<std::pair<std::string, Tensor>>& arrays) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [name, value] : arrays) by_name.emplace(name, &value);
  for (ParamId id = 0; id < params_.size(); ++id) {
    const std::string& name = params_.name(id);
    auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("missing parameter '" + name + "'");
    if (it->second->shape() != params_.value(id).shape())
      throw DataError("parameter '" + name + "' has shape " + to_string(it->second->shape()) +
                      ", model expects " + to_string(params_.value(id).shape()));
    params_.value(id) = *it->second;
  }
}

}  // namespace arm
