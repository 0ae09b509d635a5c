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

#include "arm/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "arm/errors.hpp"

namespace arm {

Adam::Adam(const ParameterStore& params, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (ParamId id = 0; id < params.size(); ++id) {
    m_.emplace_back(params.value(id).shape());
    v_.emplace_back(params.value(id).shape());
  }
}

void Adam::step(ParameterStore& params, const Gradients& grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ShapeError("adam: parameter and gradient counts differ from construction");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (ParamId id = 0; id < m_.size(); ++id) {
    Tensor& p = params.value(id);
    const Tensor& g = grads[id];
    Tensor& m = m_[id];
    Tensor& v = v_[id];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

double lr_at(std::size_t step, std::size_t total_steps, double base_lr, double warmup) {
  if (total_steps == 0) return base_lr;
  const double s = static_cast<double>(std::min(step, total_steps));
  const double total = static_cast<double>(total_steps);
  const double w = warmup * total;
  if (s < w) return base_lr * s / w;
  if (w >= total) return base_lr;
  return base_lr * (total - s) / (total - w);
}

bool EarlyStopper::update(double score) {
  ++count_;
  if (count_ == 1 || score < best_) {
    best_ = score;
    best_index_ = count_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

}  // namespace arm
