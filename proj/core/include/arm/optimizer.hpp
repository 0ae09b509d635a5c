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

#include "arm/graph.hpp"

namespace arm {

/// Adam with bias-corrected moments.
class Adam {
 public:
  Adam(const ParameterStore& params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(ParameterStore& params, const Gradients& grads, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

/// Linear warm-up from 0 to `base_lr` over the first `warmup` fraction of
/// `total_steps`, then linear decay to 0 at `total_steps`.
double lr_at(std::size_t step, std::size_t total_steps, double base_lr, double warmup);

/// Tracks the best validation score and signals when `patience`
/// evaluations have passed without improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Records one evaluation; true when it is a new best.
  bool update(double score);
  bool should_stop() const noexcept { return since_best_ >= patience_; }
  std::size_t best_index() const noexcept { return best_index_; }
  double best_score() const noexcept { return best_; }
  std::size_t evaluations() const noexcept { return count_; }

 private:
  std::size_t patience_;
  std::size_t count_ = 0, since_best_ = 0, best_index_ = 0;
  double best_ = 0.0;
};

}  // namespace arm
