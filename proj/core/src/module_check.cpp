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

#include "arm/module_check.hpp"

#include <cmath>

#include "arm/errors.hpp"
#include "arm/model.hpp"
#include "arm/rng.hpp"

namespace arm {
namespace {

struct Group {
  const char* module;
  const char* prefix;
  bool stochastic;
};

constexpr Group kGroups[] = {
    {"auel", "auel.", false},
    {"moe", "moe.", true},
    {"mkls", "mkls.", true},
    {"backbone", "backbone.", false},
};

void randomize(ParameterStore& params, Rng& rng) {
  for (ParamId id = 0; id < params.size(); ++id) {
    const std::string& name = params.name(id);
    Tensor& t = params.value(id);
    for (double& v : t.values()) {
      if (name == "auel.alpha") {
        v = rng.uniform(0.5, 0.95);
      } else if (name == "auel.window_weights" || name == "auel.gamma") {
        v = rng.uniform(0.5, 1.5);
      } else if (name.find(".router.") != std::string::npos) {
        v = rng.normal(0.0, 0.5);
      } else {
        v += rng.normal(0.0, 0.2);
      }
    }
  }
}

GradCheckReport check_group(const Group& group, bool training, std::uint64_t seed,
                            const GradCheckOptions& options) {
  ModelConfig config = toy_model_config();
  ArmModel model(config, seed);
  Rng rng(seed ^ 0xc0ffeeULL);
  randomize(model.parameters(), rng);
  Tensor input = Tensor::matrix(config.input_len, config.channels);
  for (std::size_t t = 0; t < config.input_len; ++t)
    for (std::size_t j = 0; j < config.channels; ++j)
      input(t, j) = std::sin(0.7 * static_cast<double>(t) + 1.3 * static_cast<double>(j)) +
                    rng.normal(0.0, 0.5);

  const std::uint64_t dropout_seed = seed * 7919 + 17;
  ParamProgram program = [&](Graph& g) {
    Rng dropout_rng(dropout_seed);
    ForwardContext ctx{training, training ? &dropout_rng : nullptr, nullptr};
    return model.forward(g, input, ctx);
  };
  std::string name = std::string(group.module) + (training ? " (training)" : "");
  return check_parameter_gradients(std::move(name), model.parameters(), program,
                                   {group.prefix}, options);
}

}  // namespace

std::vector<std::string> checkable_modules() {
  return {"tensor", "auel", "moe", "mkls", "backbone", "all"};
}

ModelConfig toy_model_config() {
  ModelConfig c;
  c.input_len = 8;
  c.pred_len = 4;
  c.channels = 3;
  c.backbone.d_model = 4;
  c.backbone.heads = 2;
  c.moe.experts = 2;
  return c;
}

std::vector<GradCheckReport> check_module(std::string_view module, std::uint64_t seed,
                                          const GradCheckOptions& options) {
  std::vector<GradCheckReport> reports;
  const bool all = module == "all";
  if (all || module == "tensor") {
    for (const std::string& op : checkable_ops()) reports.push_back(check_op(op, seed, options));
  }
  bool matched = all || module == "tensor";
  for (const Group& group : kGroups) {
    if (!all && module != group.module) continue;
    matched = true;
    reports.push_back(check_group(group, false, seed, options));
    if (group.stochastic) reports.push_back(check_group(group, true, seed, options));
  }
  if (!matched) throw ConfigError("unknown module '" + std::string(module) + "'");
  return reports;
}

}  // namespace arm
