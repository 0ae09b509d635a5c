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

#include <benchmark/benchmark.h>

#include <cmath>

#include "arm/mkls.hpp"
#include "arm/model.hpp"
#include "arm/ops.hpp"
#include "arm/rng.hpp"

namespace {

arm::ModelConfig desk_config(bool modules) {
  arm::ModelConfig c;
  c.input_len = 96;
  c.pred_len = 24;
  c.channels = 8;
  c.auel.distribution = c.auel.temporal = modules;
  c.mkls.pre = c.mkls.post = modules;
  return c;
}

arm::Tensor sample_input(std::size_t l, std::size_t c) {
  arm::Rng rng(9);
  arm::Tensor x = arm::Tensor::matrix(l, c);
  double level = 0.0;
  for (std::size_t t = 0; t < l; ++t) {
    level += rng.normal(0.0, 0.1);
    for (std::size_t j = 0; j < c; ++j) x(t, j) = level + 0.1 * static_cast<double>(j);
  }
  return x;
}

void BM_MklsForward(benchmark::State& state) {
  arm::ParameterStore params;
  arm::Rng init(5);
  arm::MklsConfig cfg;
  arm::Mkls mkls(params, "mkls", 96, 16, cfg, init);
  const arm::Tensor x = sample_input(96, 16);
  for (auto _ : state) {
    arm::Graph g(&params);
    arm::Var y = mkls.forward(g, g.constant(x), arm::ForwardContext{});
    benchmark::DoNotOptimize(y.value().raw());
  }
}
BENCHMARK(BM_MklsForward);

void BM_ModelTrainStep(benchmark::State& state) {
  const arm::ModelConfig config = desk_config(state.range(0) != 0);
  arm::ArmModel model(config, 1);
  const arm::Tensor x = sample_input(config.input_len, config.channels);
  const arm::Tensor y = sample_input(config.pred_len, config.channels);
  arm::Rng rng(6);
  for (auto _ : state) {
    arm::Graph g(&model.parameters());
    arm::ForwardContext ctx{true, &rng, nullptr};
    arm::Var out = model.forward(g, x, ctx);
    arm::Var loss = arm::ops::mse(out, g.constant(y));
    g.backward(loss);
    benchmark::ClobberMemory();
  }
  state.SetLabel(state.range(0) ? "full" : "backbone only");
}
BENCHMARK(BM_ModelTrainStep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_ModelPredict(benchmark::State& state) {
  const arm::ModelConfig config = desk_config(true);
  arm::ArmModel model(config, 1);
  const arm::Tensor x = sample_input(config.input_len, config.channels);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x).raw());
}
BENCHMARK(BM_ModelPredict)->Unit(benchmark::kMillisecond);

}  // namespace
