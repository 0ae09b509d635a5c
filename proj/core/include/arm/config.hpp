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
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace arm {

struct AuelConfig {
  bool distribution = true;  // EMA mean / multi-window std / affine
  bool temporal = true;      // MoE horizon initialisation and refinement
  double eps = 1e-5;
  double alpha_init = 0.9;
  /// Empty: derived from the MKLS kernel sizes (see resolved_windows).
  std::vector<std::size_t> windows;
};

struct MoeConfig {
  std::size_t experts = 2;
  std::size_t hidden_mult = 4;  // hidden width = hidden_mult * (L_I + L_P)
  double dropout = 0.75;
  /// "gelu" or "identity" (linear experts).
  std::string activation = "gelu";
  /// Coefficient of a Switch-style load-balancing term; 0 disables it.
  double load_balance = 0.0;
  /// Standard deviation of the router's initial weights.
  double router_init = 0.02;
};

struct MklsConfig {
  bool pre = true;
  bool post = true;
  std::vector<std::size_t> kernels{25, 145, 385};
  double dropout = 0.25;
};

struct BackboneConfig {
  std::size_t d_model = 16;
  std::size_t heads = 8;
  std::size_t encoder_layers = 2;
  std::size_t decoder_layers = 1;
  std::size_t ffn_mult = 4;
  double decoder_dropout = 0.0;
  bool label_prepend = false;
  std::size_t label_len = 0;  // 0: L_I / 2 when label_prepend is on
};

struct ModelConfig {
  std::size_t input_len = 720;
  std::size_t pred_len = 96;
  std::size_t channels = 0;  // filled from the dataset when training
  AuelConfig auel;
  MoeConfig moe;
  MklsConfig mkls;
  BackboneConfig backbone;

  std::size_t total_len() const noexcept { return input_len + pred_len; }
};

struct RandomDropConfig {
  bool enabled = true;
  double max_rate = 0.99;
  /// When false, dropped channels are excluded from the training loss.
  bool loss_on_dropped = true;
};

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
};

struct TrainConfig {
  double lr = 5e-5;
  std::size_t epochs = 100;
  std::size_t patience = 30;
  double warmup = 0.10;
  std::size_t batch_size = 32;
  std::size_t seed = 2024;
  std::size_t threads = 1;
  double grad_clip = 0.0;  // global-norm clip, 0 disables
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t stride = 1;
  RandomDropConfig rd;
  SplitSpec split;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

/// Parses `key = value` lines; `#` starts a comment, lists are comma
/// separated. Unknown keys and malformed values raise ConfigError.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(to_text(c)) == c.
std::string to_text(const RunConfig& config);
/// Throws ConfigError describing the first violated constraint.
void validate(const RunConfig& config);
void validate(const ModelConfig& config);
/// FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// AUEL window lengths: explicit `auel.windows`, otherwise the MKLS kernel
/// sizes scaled by L_I/720 when L_I < 720, clamped to [2, L_I], ascending.
std::vector<std::size_t> resolved_windows(const ModelConfig& config);

}  // namespace arm
