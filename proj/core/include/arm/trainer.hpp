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

#include "arm/checkpoint.hpp"
#include "arm/config.hpp"
#include "arm/data.hpp"
#include "arm/model.hpp"

namespace arm {

struct Metrics {
  double mse = 0.0;
  double mae = 0.0;
  std::size_t windows = 0;
  std::vector<double> channel_mse;  // per column, same averaging
};

using Predictor = std::function<Tensor(const Tensor& input)>;

/// Mean squared / absolute error over every window, horizon step and
/// channel. Per-window sums are combined in window order, so the result
/// does not depend on `threads`.
Metrics evaluate_predictor(const WindowSet& windows, const Predictor& predict,
                           std::size_t threads = 1);
/// Evaluation-mode metrics of a model (no dropout, no channel dropping).
Metrics evaluate(const ArmModel& model, const WindowSet& windows, std::size_t threads = 1);
/// Last input value per channel repeated over the horizon.
Tensor repeat_forecast(const Tensor& input, std::size_t pred_len);
Metrics repeat_baseline(const WindowSet& windows);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mse = 0.0;
  double val_mae = 0.0;
  double lr = 0.0;  // rate used by the epoch's last step
  double seconds = 0.0;
};

struct RunReport {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_mse = 0.0;
  Metrics test;
  Metrics repeat_test;
  std::size_t seed = 0;
  std::string config_hash;
  double wall_seconds = 0.0;
  bool early_stopped = false;
  std::size_t steps = 0;
  std::size_t parameter_count = 0;
  std::size_t train_windows = 0;

  std::string to_json() const;
  std::string epochs_csv() const;
};

struct TrainResult {
  RunReport report;
  Checkpoint checkpoint;  // parameters of the best validation epoch
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Full training run: standardise with train statistics, Adam with warm-up
/// and linear decay, Random Dropping when enabled, validation after every
/// epoch with early stopping, test metrics of the best validation epoch.
/// A non-finite loss aborts with NumericError naming the epoch, step,
/// batch position and seed.
TrainResult train(const RunConfig& config, const Dataset& dataset, const TrainHooks& hooks = {});

/// Training loss of one sample: MSE over all channels, or only over the
/// channels flagged in `keep` when it is given.
Var forecast_loss(Var prediction, const Tensor& target, const std::vector<bool>* keep);

Checkpoint make_checkpoint(const RunConfig& config, const ArmModel& model,
                           const Standardizer& scaler);

struct LoadedModel {
  RunConfig config;
  ArmModel model;
  Standardizer scaler;
};
LoadedModel load_model(const Checkpoint& checkpoint);

}  // namespace arm
