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

#include "arm/backbone.hpp"

#include <cmath>
#include <string>

#include "arm/errors.hpp"
#include "arm/ops.hpp"

namespace arm {
namespace {

Tensor uniform_matrix(std::size_t r, std::size_t c, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(r));
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor normal_matrix(std::size_t r, std::size_t c, double sd, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = rng.normal(0.0, sd);
  return t;
}

Backbone::Attention make_attention(ParameterStore& p, const std::string& prefix, std::size_t d,
                                   Rng& init) {
  Backbone::Attention a{};
  a.wq = p.add(prefix + ".wq", uniform_matrix(d, d, init));
  a.bq = p.add(prefix + ".bq", Tensor::matrix(1, d));
  a.wk = p.add(prefix + ".wk", uniform_matrix(d, d, init));
  a.bk = p.add(prefix + ".bk", Tensor::matrix(1, d));
  a.wv = p.add(prefix + ".wv", uniform_matrix(d, d, init));
  a.bv = p.add(prefix + ".bv", Tensor::matrix(1, d));
  a.wo = p.add(prefix + ".wo", uniform_matrix(d, d, init));
  a.bo = p.add(prefix + ".bo", Tensor::matrix(1, d));
  return a;
}

Backbone::Norm make_norm(ParameterStore& p, const std::string& prefix, std::size_t d) {
  return {p.add(prefix + ".gamma", Tensor::matrix(1, d, 1.0)),
          p.add(prefix + ".beta", Tensor::matrix(1, d))};
}

Backbone::FeedForward make_ffn(ParameterStore& p, const std::string& prefix, std::size_t d,
                               std::size_t hidden, Rng& init) {
  Backbone::FeedForward f{};
  f.w1 = p.add(prefix + ".w1", uniform_matrix(d, hidden, init));
  f.b1 = p.add(prefix + ".b1", Tensor::matrix(1, hidden));
  f.w2 = p.add(prefix + ".w2", uniform_matrix(hidden, d, init));
  f.b2 = p.add(prefix + ".b2", Tensor::matrix(1, d));
  return f;
}

}  // namespace

Backbone::Backbone(ParameterStore& params, const ModelConfig& config, Rng& init)
    : input_len_(config.input_len),
      pred_len_(config.pred_len),
      d_(config.backbone.d_model),
      heads_(config.backbone.heads),
      decoder_dropout_(config.backbone.decoder_dropout) {
  const BackboneConfig& b = config.backbone;
  if (d_ == 0 || heads_ == 0 || d_ % heads_ != 0)
    throw ConfigError("backbone: d_model " + std::to_string(d_) + " not divisible by " +
                      std::to_string(heads_) + " heads");
  const std::size_t label = b.label_prepend ? (b.label_len ? b.label_len : input_len_ / 2) : 0;
  if (label > input_len_) throw ConfigError("backbone: label segment longer than the input");
  dec_len_ = label + pred_len_;
  const std::size_t c = config.channels;
  const std::size_t total = config.total_len();
  const std::size_t hidden = b.ffn_mult * d_;

  in_w_ = params.add("backbone.input_proj.w", uniform_matrix(c, d_, init));
  in_b_ = params.add("backbone.input_proj.b", Tensor::matrix(1, d_));
  pos_ = params.add("backbone.pos_embed", normal_matrix(total, d_, 0.02, init));
  task_input_ = params.add("backbone.task_embed_input", normal_matrix(1, d_, 0.02, init));
  task_horizon_ = params.add("backbone.task_embed_horizon", normal_matrix(1, d_, 0.02, init));

  const MklsConfig& m = config.mkls;
  if (m.pre) {
    encoder_pre_.emplace(params, "mkls.encoder_pre", input_len_, d_, m, init);
    decoder_pre_.emplace(params, "mkls.decoder_pre", dec_len_, d_, m, init);
  }
  for (std::size_t i = 0; i < b.encoder_layers; ++i) {
    const std::string p = "backbone.encoder" + std::to_string(i);
    EncoderLayer layer{make_attention(params, p + ".self", d_, init), make_norm(params, p + ".norm1", d_),
                       make_norm(params, p + ".norm2", d_),
                       make_ffn(params, p + ".ffn", d_, hidden, init), std::nullopt};
    if (m.post)
      layer.post.emplace(params, "mkls.encoder" + std::to_string(i) + "_post", input_len_, d_, m,
                         init, layer.norm1.gamma, layer.norm1.beta);
    encoder_.push_back(std::move(layer));
  }
  for (std::size_t i = 0; i < b.decoder_layers; ++i) {
    const std::string p = "backbone.decoder" + std::to_string(i);
    DecoderLayer layer{make_attention(params, p + ".self", d_, init),
                       make_attention(params, p + ".cross", d_, init),
                       make_norm(params, p + ".norm1", d_),
                       make_norm(params, p + ".norm2", d_),
                       make_norm(params, p + ".norm3", d_),
                       make_ffn(params, p + ".ffn", d_, hidden, init),
                       std::nullopt,
                       std::nullopt};
    if (m.post) {
      const std::string q = "mkls.decoder" + std::to_string(i);
      layer.post_self.emplace(params, q + "_self_post", dec_len_, d_, m, init, layer.norm1.gamma,
                              layer.norm1.beta);
      layer.post_cross.emplace(params, q + "_cross_post", dec_len_, d_, m, init,
                               layer.norm2.gamma, layer.norm2.beta);
    }
    decoder_.push_back(std::move(layer));
  }
  out_w_ = params.add("backbone.output_proj.w", uniform_matrix(d_, c, init));
  out_b_ = params.add("backbone.output_proj.b", Tensor::matrix(1, c));
}

Var Backbone::embed(Graph& g, Var x) const {
  const std::size_t total = input_len_ + pred_len_;
  if (x.rows() != total)
    throw ShapeError("backbone.embed: expected " + std::to_string(total) + " rows, got " +
                     to_string(x.shape()));
  Var segments = ops::concat_rows({ops::broadcast_rows(g.param(task_input_), input_len_),
                                   ops::broadcast_rows(g.param(task_horizon_), pred_len_)});
  return ops::linear(x, g.param(in_w_), g.param(in_b_)) + g.param(pos_) + segments;
}

Var Backbone::attention(Graph& g, const Attention& a, Var query, Var key, Var value) const {
  Var q = ops::linear(query, g.param(a.wq), g.param(a.bq));
  Var k = ops::linear(key, g.param(a.wk), g.param(a.bk));
  Var v = ops::linear(value, g.param(a.wv), g.param(a.bv));
  const std::size_t dh = d_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> heads;
  heads.reserve(heads_);
  for (std::size_t h = 0; h < heads_; ++h) {
    Var qh = ops::slice_cols(q, h * dh, (h + 1) * dh);
    Var kh = ops::slice_cols(k, h * dh, (h + 1) * dh);
    Var vh = ops::slice_cols(v, h * dh, (h + 1) * dh);
    Var weights = ops::softmax_rows(ops::matmul(qh, ops::transpose(kh)) * scale);
    heads.push_back(ops::matmul(weights, vh));
  }
  Var merged = heads_ == 1 ? heads.front() : ops::concat_cols(heads);
  return ops::linear(merged, g.param(a.wo), g.param(a.bo));
}

Var Backbone::feed_forward(Graph& g, const FeedForward& f, Var x) const {
  Var h = ops::gelu(ops::linear(x, g.param(f.w1), g.param(f.b1)));
  return ops::linear(h, g.param(f.w2), g.param(f.b2));
}

Var Backbone::maybe_dropout(Var x, const ForwardContext& ctx) const {
  if (!ctx.training || decoder_dropout_ == 0.0) return x;
  return ops::dropout(x, decoder_dropout_, ctx.random());
}

Var Backbone::encoder_layer(Graph& g, const EncoderLayer& layer, Var x,
                            const ForwardContext& ctx) const {
  CrossFn self = [&](Var q, Var k, Var v) { return attention(g, layer.self, q, k, v); };
  Var h = layer.post ? layer.post->apply(g, x, self, ctx)
                     : ops::layer_norm_rows(x + self(x, x, x), g.param(layer.norm1.gamma),
                                            g.param(layer.norm1.beta));
  return ops::layer_norm_rows(h + feed_forward(g, layer.ffn, h), g.param(layer.norm2.gamma),
                              g.param(layer.norm2.beta));
}

Var Backbone::decoder_layer(Graph& g, const DecoderLayer& layer, Var x, Var memory,
                            const ForwardContext& ctx) const {
  CrossFn self = [&](Var q, Var k, Var v) {
    return maybe_dropout(attention(g, layer.self, q, k, v), ctx);
  };
  CrossFn cross = [&](Var q, Var k, Var v) {
    return maybe_dropout(attention(g, layer.cross, q, k, v), ctx);
  };
  Var h1 = layer.post_self ? layer.post_self->apply(g, x, self, ctx)
                           : ops::layer_norm_rows(x + self(x, x, x), g.param(layer.norm1.gamma),
                                                  g.param(layer.norm1.beta));
  Var h2 = layer.post_cross
               ? layer.post_cross->apply(g, h1, cross, ctx, memory, memory)
               : ops::layer_norm_rows(h1 + cross(h1, memory, memory), g.param(layer.norm2.gamma),
                                      g.param(layer.norm2.beta));
  Var f = maybe_dropout(feed_forward(g, layer.ffn, h2), ctx);
  return ops::layer_norm_rows(h2 + f, g.param(layer.norm3.gamma), g.param(layer.norm3.beta));
}

Var Backbone::forward(Graph& g, Var x, const ForwardContext& ctx) const {
  Var tokens = embed(g, x);
  const std::size_t total = input_len_ + pred_len_;

  Var enc = ops::slice_rows(tokens, 0, input_len_);
  CrossFn encoder = [&](Var q, Var, Var) {
    Var h = q;
    for (const EncoderLayer& layer : encoder_) h = encoder_layer(g, layer, h, ctx);
    return h;
  };
  Var memory = encoder_pre_ ? encoder_pre_->apply(g, enc, encoder, ctx) : encoder(enc, enc, enc);

  Var dec = ops::slice_rows(tokens, total - dec_len_, total);
  CrossFn decoder = [&](Var q, Var, Var) {
    Var h = q;
    for (const DecoderLayer& layer : decoder_) h = decoder_layer(g, layer, h, memory, ctx);
    return h;
  };
  Var out = decoder_pre_ ? decoder_pre_->apply(g, dec, decoder, ctx) : decoder(dec, dec, dec);
  if (dec_len_ != pred_len_) out = ops::slice_rows(out, dec_len_ - pred_len_, dec_len_);
  return ops::linear(out, g.param(out_w_), g.param(out_b_));
}

}  // namespace arm
