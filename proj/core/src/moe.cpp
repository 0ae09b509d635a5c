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

#include "arm/moe.hpp"

#include <cmath>

#include "arm/errors.hpp"
#include "arm/ops.hpp"

namespace arm {
namespace {

Tensor uniform_matrix(std::size_t r, std::size_t c, double bound, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

}  // namespace

Moe::Moe(ParameterStore& params, const std::string& prefix, std::size_t in_width,
         std::size_t out_width, const MoeConfig& config, Rng& init)
    : in_(in_width),
      out_(out_width),
      dropout_(config.dropout),
      identity_activation_(config.activation == "identity"),
      load_balance_(config.load_balance) {
  if (config.experts == 0) throw ConfigError("moe: need at least one expert");
  const std::size_t n = config.experts;
  const std::size_t hidden = config.hidden_mult * in_width;

  Tensor rw = Tensor::matrix(in_width, n);
  for (double& v : rw.values()) v = init.normal(0.0, config.router_init);
  router_w_ = params.add(prefix + ".router.w", std::move(rw));
  router_b_ = params.add(prefix + ".router.b", Tensor::matrix(1, n));

  const double bound = 1.0 / std::sqrt(static_cast<double>(in_width));
  for (std::size_t e = 0; e < n; ++e) {
    const std::string p = prefix + ".expert" + std::to_string(e);
    Expert ex{};
    ex.w1 = params.add(p + ".w1", uniform_matrix(in_width, hidden, bound, init));
    ex.b1 = params.add(p + ".b1", Tensor::matrix(1, hidden));
    ex.w2 = params.add(p + ".w2", Tensor::matrix(hidden, out_width));
    ex.b2 = params.add(p + ".b2", Tensor::matrix(1, out_width));
    experts_.push_back(ex);
  }
}

Route Moe::route(const ParameterStore& params, std::span<const double> z) const {
  if (z.size() != in_)
    throw ShapeError("moe.route: expected " + std::to_string(in_) + " inputs, got " +
                     std::to_string(z.size()));
  const Tensor& w = params.value(router_w_);
  const Tensor& b = params.value(router_b_);
  const std::size_t n = experts_.size();
  std::vector<double> logits(n);
  for (std::size_t e = 0; e < n; ++e) {
    double s = b[e];
    for (std::size_t i = 0; i < in_; ++i) s += z[i] * w(i, e);
    logits[e] = s;
  }
  std::size_t best = 0;
  for (std::size_t e = 1; e < n; ++e)
    if (logits[e] > logits[best]) best = e;
  double z_sum = 0.0;
  for (double l : logits) z_sum += std::exp(l - logits[best]);
  return {best, 1.0 / z_sum};
}

Var Moe::forward(Graph& g, Var z, Var residual, const ForwardContext& ctx) const {
  const std::size_t rows = z.rows();
  if (z.cols() != in_ || residual.rows() != rows || residual.cols() != out_) {
    throw ShapeError("moe: input " + to_string(z.shape()) + " and residual " +
                     to_string(residual.shape()) + " do not match widths " +
                     std::to_string(in_) + " -> " + std::to_string(out_));
  }
  const std::size_t n = experts_.size();
  Var probs = ops::softmax_rows(ops::linear(z, g.param(router_w_), g.param(router_b_)));

  // top-1 choice per row, lowest index on ties
  const Tensor& p = probs.value();
  std::vector<std::vector<std::size_t>> members(n);
  Tensor onehot = Tensor::matrix(rows, n);
  std::int64_t code = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    for (std::size_t e = 1; e < n; ++e)
      if (p(r, e) > p(r, best)) best = e;
    members[best].push_back(r);
    onehot(r, best) = 1.0;
    code = code * 31 + static_cast<std::int64_t>(best) + 1;
  }
  g.record_decision(code);

  Var gate = ops::sum_cols(probs * g.constant(onehot));  // rows x 1

  std::vector<Var> parts;
  for (std::size_t e = 0; e < n; ++e) {
    if (members[e].empty()) continue;
    const Expert& ex = experts_[e];
    Var x = ops::gather_rows(z, members[e]);
    Var h = ops::linear(x, g.param(ex.w1), g.param(ex.b1));
    if (!identity_activation_) h = ops::gelu(h);
    if (ctx.training && dropout_ > 0.0) h = ops::dropout(h, dropout_, ctx.random());
    Var y = ops::linear(h, g.param(ex.w2), g.param(ex.b2));
    parts.push_back(ops::scatter_rows(y, members[e], rows));
  }
  Var mixed = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) mixed = mixed + parts[i];

  if (ctx.training && load_balance_ > 0.0 && ctx.aux_losses != nullptr) {
    Tensor fraction = Tensor::matrix(1, n);
    for (std::size_t e = 0; e < n; ++e)
      fraction[e] = static_cast<double>(members[e].size()) / static_cast<double>(rows);
    Var mean_prob = ops::sum_rows(probs) * (1.0 / static_cast<double>(rows));
    ctx.aux_losses->push_back(ops::sum(mean_prob * g.constant(fraction)) *
                              (load_balance_ * static_cast<double>(n)));
  }
  return mixed * ops::broadcast_cols(gate, out_) + residual;
}

}  // namespace arm
