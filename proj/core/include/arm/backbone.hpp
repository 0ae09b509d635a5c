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
#include <optional>
#include <vector>

#include "arm/config.hpp"
#include "arm/graph.hpp"
#include "arm/mkls.hpp"
#include "arm/module.hpp"
#include "arm/rng.hpp"

namespace arm {

/// Vanilla post-norm Transformer encoder-decoder over the (L_I + L_P) x C
/// block. The encoder reads the first L_I token rows, the decoder the last
/// L_P rows (optionally preceded by a label segment) and cross-attends the
/// encoder memory. Pre-MKLS sits in front of each stack and Post-MKLS wraps
/// every attention sublayer when enabled.
///
/// Parameter names start with `backbone.` except the MKLS wrappers, which
/// live under `mkls.`.
class Backbone {
 public:
  struct Attention {
    ParamId wq, bq, wk, bk, wv, bv, wo, bo;
  };
  struct Norm {
    ParamId gamma, beta;
  };
  struct FeedForward {
    ParamId w1, b1, w2, b2;
  };

  Backbone(ParameterStore& params, const ModelConfig& config, Rng& init);

  std::size_t decoder_length() const noexcept { return dec_len_; }
  ParamId input_weight() const noexcept { return in_w_; }
  ParamId input_bias() const noexcept { return in_b_; }
  ParamId output_weight() const noexcept { return out_w_; }
  ParamId output_bias() const noexcept { return out_b_; }

  /// inputProj(x) + position + segment embeddings, (L_I + L_P) x d.
  Var embed(Graph& g, Var x) const;
  /// Intermediate forecast X_ED, L_P x C.
  Var forward(Graph& g, Var x, const ForwardContext& ctx) const;

  /// Multi-head scaled dot-product attention with output projection.
  Var attention(Graph& g, const Attention& a, Var query, Var key, Var value) const;

 private:
  struct EncoderLayer {
    Attention self;
    Norm norm1, norm2;
    FeedForward ffn;
    std::optional<PostMkls> post;
  };
  struct DecoderLayer {
    Attention self, cross;
    Norm norm1, norm2, norm3;
    FeedForward ffn;
    std::optional<PostMkls> post_self, post_cross;
  };

  Var feed_forward(Graph& g, const FeedForward& f, Var x) const;
  Var encoder_layer(Graph& g, const EncoderLayer& layer, Var x, const ForwardContext& ctx) const;
  Var decoder_layer(Graph& g, const DecoderLayer& layer, Var x, Var memory,
                    const ForwardContext& ctx) const;
  Var maybe_dropout(Var x, const ForwardContext& ctx) const;

  std::size_t input_len_, pred_len_, dec_len_, d_, heads_;
  double decoder_dropout_;
  ParamId in_w_, in_b_, pos_, task_input_, task_horizon_, out_w_, out_b_;
  std::optional<PreMkls> encoder_pre_, decoder_pre_;
  std::vector<EncoderLayer> encoder_;
  std::vector<DecoderLayer> decoder_;
};

}  // namespace arm
