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

#include "arm/mkls.hpp"

#include <cmath>

#include "arm/errors.hpp"
#include "arm/ops.hpp"

namespace arm {
namespace {

Tensor identity(std::size_t n) {
  Tensor t = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor normal_matrix(std::size_t r, std::size_t c, double sd, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.normal(0.0, sd);
  return t;
}

void check_block(const char* who, Var x, std::size_t l, std::size_t d) {
  if (x.rows() != l || x.cols() != d)
    throw ShapeError(std::string(who) + ": expected [" + std::to_string(l) + "x" +
                     std::to_string(d) + "], got " + to_string(x.shape()));
}

}  // namespace

Mkls::Mkls(ParameterStore& params, const std::string& prefix, std::size_t length,
           std::size_t width, const MklsConfig& config, Rng& init)
    : length_(length), width_(width), dropout_(config.dropout) {
  if (config.kernels.empty()) throw ConfigError("mkls: need at least one kernel size");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0))
    throw ConfigError("mkls: kernel dropout must lie in [0, 1)");
  for (std::size_t j = 0; j < config.kernels.size(); ++j) {
    const std::size_t s = ops::cropped_kernel_size(config.kernels[j], length);
    sizes_.push_back(s);
    const std::string p = prefix + ".conv" + std::to_string(j);
    ParamId w = params.add(p + ".w", Tensor::matrix(width, s));
    ParamId b = params.add(p + ".b", Tensor::matrix(1, width));
    convs_.emplace_back(w, b);
  }
  const std::size_t n = convs_.size();
  wq_ = params.add(prefix + ".wq", identity(width));
  wk_ = params.add(prefix + ".wk", identity(width));
  Tensor wv = Tensor::matrix(width, n);
  const double bound = 1.0 / std::sqrt(static_cast<double>(width));
  for (double& v : wv.values()) v = init.uniform(-bound, bound);
  wv_ = params.add(prefix + ".wv", std::move(wv));
  pos_ = params.add(prefix + ".attn_pos", normal_matrix(width, length, 0.02, init));
}

std::vector<Var> Mkls::kernel_outputs(Graph& g, Var x) const {
  check_block("mkls", x, length_, width_);
  std::vector<Var> out;
  out.reserve(convs_.size());
  for (const auto& [w, b] : convs_) out.push_back(ops::depthwise_conv1d(x, g.param(w), g.param(b)));
  return out;
}

Var Mkls::channel_attention(Graph& g, Var x, Var average) const {
  Var pos = g.param(pos_);
  Var q = ops::matmul(g.param(wq_), ops::transpose(x) + pos);        // d x l
  Var k = ops::matmul(g.param(wk_), ops::transpose(average) + pos);  // d x l
  Var affinity = ops::softmax_rows(ops::matmul(q, ops::transpose(k)) *
                                   (1.0 / std::sqrt(static_cast<double>(width_))));
  return ops::matmul(affinity, g.param(wv_));
}

Var Mkls::forward(Graph& g, Var x, const ForwardContext& ctx) const {
  std::vector<Var> stack = kernel_outputs(g, x);
  Var average = kernel_dropout_avg(g, stack, dropout_, ctx.rng, ctx.training);
  Var weights = channel_attention(g, x, average);
  Var out = x;
  for (std::size_t j = 0; j < stack.size(); ++j) {
    Var column = ops::transpose(ops::slice_cols(weights, j, j + 1));  // 1 x d
    out = out + stack[j] * ops::broadcast_rows(column, length_);
  }
  return out;
}

Var kernel_dropout_avg(Graph& g, const std::vector<Var>& stack, double rate, Rng* rng,
                       bool training) {
  if (stack.empty()) throw ShapeError("kernel_dropout_avg: empty kernel stack");
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("kernel_dropout_avg: rate must lie in [0, 1), got " + std::to_string(rate));
  const double n = static_cast<double>(stack.size());
  const bool dropping = training && rate > 0.0;
  if (dropping && rng == nullptr) throw GraphError("kernel_dropout_avg: training needs an Rng");
  Var sum{};
  for (const Var& block : stack) {
    if (dropping && rng->bernoulli(rate)) continue;
    sum = sum.valid() ? sum + block : block;
  }
  if (!sum.valid()) return g.constant(Tensor(stack.front().shape()));
  const double factor = dropping ? 1.0 / ((1.0 - rate) * n) : 1.0 / n;
  return sum * factor;
}

PreMkls::PreMkls(ParameterStore& params, const std::string& prefix, std::size_t length,
                 std::size_t width, const MklsConfig& config, Rng& init)
    : mkls_(params, prefix, length, width, config, init),
      pos_(params.add(prefix + ".query_pos", normal_matrix(length, width, 0.02, init))) {}

Var PreMkls::query(Graph& g, Var x, const ForwardContext& ctx) const {
  return mkls_.forward(g, x, ctx) + g.param(pos_);
}

Var PreMkls::apply(Graph& g, Var x, const CrossFn& cross, const ForwardContext& ctx, Var key,
                   Var value) const {
  Var q = query(g, x, ctx);
  if (!key.valid()) key = q;
  if (!value.valid()) value = key;
  if (key.cols() != q.cols() || value.cols() != q.cols())
    throw ShapeError("pre_mkls: query " + to_string(q.shape()) + " vs key " +
                     to_string(key.shape()) + " / value " + to_string(value.shape()));
  return cross(q, key, value);
}

PostMkls::PostMkls(ParameterStore& params, const std::string& prefix, std::size_t length,
                   std::size_t width, const MklsConfig& config, Rng& init, ParamId norm_gamma,
                   ParamId norm_beta)
    : mkls_(params, prefix, length, width, config, init),
      pos_(params.add(prefix + ".query_pos", normal_matrix(length, width, 0.02, init))),
      norm_gamma_(norm_gamma),
      norm_beta_(norm_beta) {}

Var PostMkls::apply(Graph& g, Var x, const CrossFn& cross, const ForwardContext& ctx, Var key,
                    Var value) const {
  Var q = x + g.param(pos_);
  if (!key.valid()) key = q;
  if (!value.valid()) value = key;
  if (key.cols() != q.cols() || value.cols() != q.cols())
    throw ShapeError("post_mkls: query " + to_string(q.shape()) + " vs key " +
                     to_string(key.shape()) + " / value " + to_string(value.shape()));
  Var attended = cross(q, key, value);
  return ops::layer_norm_rows(mkls_.forward(g, x, ctx) + attended, g.param(norm_gamma_),
                              g.param(norm_beta_));
}

}  // namespace arm
