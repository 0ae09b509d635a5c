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
#include <span>
#include <string>
#include <vector>

#include "arm/config.hpp"
#include "arm/graph.hpp"
#include "arm/module.hpp"
#include "arm/rng.hpp"

namespace arm {

struct Route {
  std::size_t expert = 0;
  double gate = 0.0;
};

/// Top-1 mixture of MLP experts applied independently to each row (series).
///
/// Parameters under `prefix`:
///   router.w  in x E,  router.b  1 x E
///   expert<e>.w1 in x H, expert<e>.b1 1 x H, expert<e>.w2 H x out, expert<e>.b2 1 x out
/// The output layer of every expert starts at zero, so a fresh MoE returns
/// its residual unchanged.
class Moe {
 public:
  struct Expert {
    ParamId w1, b1, w2, b2;
  };

  Moe(ParameterStore& params, const std::string& prefix, std::size_t in_width,
      std::size_t out_width, const MoeConfig& config, Rng& init);

  std::size_t in_width() const noexcept { return in_; }
  std::size_t out_width() const noexcept { return out_; }
  std::size_t expert_count() const noexcept { return experts_.size(); }
  ParamId router_weight() const noexcept { return router_w_; }
  ParamId router_bias() const noexcept { return router_b_; }
  const std::vector<Expert>& experts() const noexcept { return experts_; }

  /// Argmax of the router logits (lowest index on ties) and its softmax probability.
  Route route(const ParameterStore& params, std::span<const double> z) const;

  /// gate * Expert_selected(z) + residual for every row. z: R x in,
  /// residual: R x out. Routing choices are recorded as graph decisions.
  Var forward(Graph& g, Var z, Var residual, const ForwardContext& ctx) const;

 private:
  std::size_t in_, out_;
  double dropout_;
  bool identity_activation_;
  double load_balance_;
  ParamId router_w_, router_b_;
  std::vector<Expert> experts_;
};

}  // namespace arm
