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
#include <functional>
#include <string>
#include <vector>

#include "arm/config.hpp"
#include "arm/graph.hpp"
#include "arm/module.hpp"
#include "arm/rng.hpp"

namespace arm {

/// Multi-kernel local smoothing over an l x d block: depthwise convolutions
/// of several sizes, fused per channel by weights from a channel-wise
/// attention, plus a residual.
///
/// Parameters under `prefix` (n kernels):
///   conv<j>.w  d x s_j (zero init), conv<j>.b  1 x d (zero init)
///   wq, wk     d x d (identity init)
///   wv         d x n
///   attn_pos   d x l
class Mkls {
 public:
  Mkls(ParameterStore& params, const std::string& prefix, std::size_t length, std::size_t width,
       const MklsConfig& config, Rng& init);

  std::size_t length() const noexcept { return length_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t kernel_count() const noexcept { return convs_.size(); }
  /// Stored kernel lengths (configured sizes cropped to fit `length`).
  const std::vector<std::size_t>& kernel_sizes() const noexcept { return sizes_; }
  double dropout() const noexcept { return dropout_; }

  ParamId conv_weight(std::size_t j) const { return convs_.at(j).first; }
  ParamId conv_bias(std::size_t j) const { return convs_.at(j).second; }
  ParamId query_weight() const noexcept { return wq_; }
  ParamId key_weight() const noexcept { return wk_; }
  ParamId value_weight() const noexcept { return wv_; }
  ParamId position() const noexcept { return pos_; }

  /// One l x d block per kernel.
  std::vector<Var> kernel_outputs(Graph& g, Var x) const;
  /// Channel-attention kernel weights M (d x n).
  Var channel_attention(Graph& g, Var x, Var average) const;
  /// S = sum_j X_j * M[:, j] + X.
  Var forward(Graph& g, Var x, const ForwardContext& ctx) const;

 private:
  std::size_t length_, width_;
  double dropout_;
  std::vector<std::size_t> sizes_;
  std::vector<std::pair<ParamId, ParamId>> convs_;
  ParamId wq_, wk_, wv_, pos_;
};

/// Mean of the kernel outputs. While training each block is dropped whole
/// with probability `rate` and the sum is rescaled by 1 / (1 - rate); in
/// evaluation nothing is dropped or rescaled.
Var kernel_dropout_avg(Graph& g, const std::vector<Var>& stack, double rate, Rng* rng,
                       bool training);

/// Attention used inside the wrappers: (query, key, value) -> query-shaped output.
using CrossFn = std::function<Var(Var query, Var key, Var value)>;

/// Query path MKLS(X) + P_E feeding a transformer block (`cross`). Without
/// explicit key/value the block runs in self-attention mode on the query.
///
/// Extra parameter: query_pos (l x d).
class PreMkls {
 public:
  PreMkls(ParameterStore& params, const std::string& prefix, std::size_t length,
          std::size_t width, const MklsConfig& config, Rng& init);

  const Mkls& mkls() const noexcept { return mkls_; }
  ParamId query_position() const noexcept { return pos_; }

  Var query(Graph& g, Var x, const ForwardContext& ctx) const;
  Var apply(Graph& g, Var x, const CrossFn& cross, const ForwardContext& ctx, Var key = {},
            Var value = {}) const;

 private:
  Mkls mkls_;
  ParamId pos_;
};

/// LayerNorm(MKLS(X) + cross(X + P_E, K, V)). The norm parameters are
/// supplied by the caller so the block's own norm is reused.
///
/// Extra parameter: query_pos (l x d).
class PostMkls {
 public:
  PostMkls(ParameterStore& params, const std::string& prefix, std::size_t length,
           std::size_t width, const MklsConfig& config, Rng& init, ParamId norm_gamma,
           ParamId norm_beta);

  const Mkls& mkls() const noexcept { return mkls_; }
  ParamId query_position() const noexcept { return pos_; }

  Var apply(Graph& g, Var x, const CrossFn& cross, const ForwardContext& ctx, Var key = {},
            Var value = {}) const;

 private:
  Mkls mkls_;
  ParamId pos_, norm_gamma_, norm_beta_;
};

}  // namespace arm
