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

#include "arm/graph.hpp"
#include "arm/ops.hpp"
#include "arm/rng.hpp"

namespace {

arm::Tensor random_matrix(std::size_t r, std::size_t c, arm::Rng& rng) {
  arm::Tensor t = arm::Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.normal();
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  arm::Rng rng(1);
  const arm::Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) {
    arm::Graph g;
    arm::Var y = arm::ops::matmul(g.leaf(a), g.leaf(b));
    benchmark::DoNotOptimize(y.value().raw());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  arm::Rng rng(2);
  const arm::Tensor a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) {
    arm::Graph g;
    arm::Var y = arm::ops::sum(arm::ops::matmul(g.leaf(a), g.leaf(b)));
    g.backward(y);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(16)->Arg(64);

void BM_DepthwiseConv(benchmark::State& state) {
  const auto kernel = static_cast<std::size_t>(state.range(0));
  arm::Rng rng(3);
  const arm::Tensor x = random_matrix(96, 16, rng);
  const arm::Tensor w = random_matrix(16, kernel, rng);
  const arm::Tensor b = arm::Tensor::matrix(1, 16);
  for (auto _ : state) {
    arm::Graph g;
    arm::Var y = arm::ops::sum(arm::ops::depthwise_conv1d(g.leaf(x), g.leaf(w), g.leaf(b)));
    g.backward(y);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_DepthwiseConv)->Arg(3)->Arg(25)->Arg(95);

void BM_SoftmaxRows(benchmark::State& state) {
  arm::Rng rng(4);
  const arm::Tensor x = random_matrix(96, 96, rng);
  for (auto _ : state) {
    arm::Graph g;
    arm::Var y = arm::ops::sum(arm::ops::softmax_rows(g.leaf(x)));
    g.backward(y);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_SoftmaxRows);

}  // namespace
BENCHMARK_MAIN();
