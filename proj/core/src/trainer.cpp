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

#include "arm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <optional>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "arm/errors.hpp"
#include "arm/ops.hpp"
#include "arm/optimizer.hpp"
#include "arm/random_dropping.hpp"

namespace arm {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Runs fn(worker, begin, end) over `count` items split into contiguous
/// chunks, one per worker, and rethrows the first failure.
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t w = 0; w < threads; ++w) {
    const std::size_t begin = count * w / threads;
    const std::size_t end = count * (w + 1) / threads;
    pool.emplace_back([&, w, begin, end] {
      try {
        fn(w, begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Tensor> snapshot(const ParameterStore& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (ParamId id = 0; id < params.size(); ++id) out.push_back(params.value(id));
  return out;
}

void restore(ParameterStore& params, const std::vector<Tensor>& values) {
  for (ParamId id = 0; id < params.size(); ++id) params.value(id) = values[id];
}

}  // namespace

Metrics evaluate_predictor(const WindowSet& windows, const Predictor& predict, std::size_t threads) {
  if (windows.empty()) throw DataError("evaluate: split has no windows");
  const std::size_t n = windows.size();
  const std::size_t c = windows.channels();
  std::vector<double> sq(n), ab(n), per(n * c);
  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const SeriesWindow w = windows[i];
      const Tensor y = predict(w.input);
      if (y.shape() != w.target.shape())
        throw ShapeError("evaluate: prediction " + to_string(y.shape()) + " vs target " +
                         to_string(w.target.shape()));
      double s = 0.0, a = 0.0;
      for (std::size_t k = 0; k < y.size(); ++k) {
        const double e = y[k] - w.target[k];
        s += e * e;
        a += std::abs(e);
        per[i * c + k % c] += e * e;
      }
      sq[i] = s;
      ab[i] = a;
    }
  });
  const double count = static_cast<double>(n * windows.pred_len() * c);
  Metrics m;
  m.windows = n;
  m.mse = std::accumulate(sq.begin(), sq.end(), 0.0) / count;
  m.mae = std::accumulate(ab.begin(), ab.end(), 0.0) / count;
  m.channel_mse.assign(c, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) m.channel_mse[j] += per[i * c + j];
  for (double& v : m.channel_mse) v /= static_cast<double>(n * windows.pred_len());
  return m;
}

Metrics evaluate(const ArmModel& model, const WindowSet& windows, std::size_t threads) {
  return evaluate_predictor(
      windows, [&](const Tensor& input) { return model.predict(input); }, threads);
}

Tensor repeat_forecast(const Tensor& input, std::size_t pred_len) {
  const std::size_t c = input.cols();
  const std::size_t last = input.rows() - 1;
  Tensor out = Tensor::matrix(pred_len, c);
  for (std::size_t t = 0; t < pred_len; ++t)
    for (std::size_t j = 0; j < c; ++j) out(t, j) = input(last, j);
  return out;
}

Metrics repeat_baseline(const WindowSet& windows) {
  const std::size_t lp = windows.pred_len();
  return evaluate_predictor(windows, [lp](const Tensor& input) { return repeat_forecast(input, lp); });
}

Var forecast_loss(Var prediction, const Tensor& target, const std::vector<bool>* keep) {
  Graph& g = *prediction.graph;
  Var err = ops::square(prediction - g.constant(target));
  if (keep == nullptr) return ops::mean(err);
  const std::size_t rows = target.rows(), cols = target.cols();
  if (keep->size() != cols)
    throw ShapeError("forecast_loss: mask of " + std::to_string(keep->size()) + " channels vs " +
                     to_string(target.shape()));
  Tensor weights = Tensor::matrix(rows, cols);
  std::size_t kept = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    if (!(*keep)[j]) continue;
    ++kept;
    for (std::size_t r = 0; r < rows; ++r) weights(r, j) = 1.0;
  }
  if (kept == 0) throw ShapeError("forecast_loss: every channel is masked");
  return ops::sum(err * g.constant(weights)) * (1.0 / static_cast<double>(rows * kept));
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["best_epoch"] = best_epoch;
  j["best_val_mse"] = best_val_mse;
  j["test"] = {{"mse", test.mse}, {"mae", test.mae}, {"windows", test.windows},
               {"channel_mse", test.channel_mse}};
  j["repeat_test"] = {{"mse", repeat_test.mse}, {"mae", repeat_test.mae},
                      {"channel_mse", repeat_test.channel_mse}};
  j["wall_seconds"] = wall_seconds;
  j["early_stopped"] = early_stopped;
  j["steps"] = steps;
  j["parameter_count"] = parameter_count;
  j["train_windows"] = train_windows;
  auto& e = j["epochs"] = nlohmann::json::array();
  for (const auto& r : epochs) {
    e.push_back({{"epoch", r.epoch},
                 {"train_loss", r.train_loss},
                 {"val_mse", r.val_mse},
                 {"val_mae", r.val_mae},
                 {"lr", r.lr},
                 {"seconds", r.seconds}});
  }
  return j.dump(2);
}

std::string RunReport::epochs_csv() const {
  std::string out = "epoch,train_loss,val_mse,val_mae,lr,seconds\n";
  char buf[256];
  for (const auto& r : epochs) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch, r.train_loss,
                  r.val_mse, r.val_mae, r.lr, r.seconds);
    out += buf;
  }
  return out;
}

Checkpoint make_checkpoint(const RunConfig& config, const ArmModel& model,
                           const Standardizer& scaler) {
  Checkpoint ck;
  ck.config_text = to_text(config);
  const ParameterStore& p = model.parameters();
  for (ParamId id = 0; id < p.size(); ++id) ck.arrays.emplace_back(p.name(id), p.value(id));
  ck.arrays.emplace_back("data.mean", Tensor::row_vector(scaler.mean));
  ck.arrays.emplace_back("data.std", Tensor::row_vector(scaler.std));
  return ck;
}

LoadedModel load_model(const Checkpoint& checkpoint) {
  RunConfig config = parse_config(checkpoint.config_text);
  ArmModel model(config.model, config.train.seed);
  model.load_parameters(checkpoint.arrays);
  Standardizer scaler;
  const auto& mean = checkpoint.array("data.mean").data();
  const auto& sd = checkpoint.array("data.std").data();
  scaler.mean.assign(mean.begin(), mean.end());
  scaler.std.assign(sd.begin(), sd.end());
  if (scaler.mean.size() != config.model.channels || scaler.std.size() != config.model.channels)
    throw DataError("checkpoint standardisation stats do not match the channel count");
  return {std::move(config), std::move(model), std::move(scaler)};
}

TrainResult train(const RunConfig& input_config, const Dataset& dataset, const TrainHooks& hooks) {
  const auto started = Clock::now();
  RunConfig config = input_config;
  config.model.channels = dataset.channels();
  validate(config);
  const TrainConfig& tc = config.train;
  const std::size_t c = config.model.channels;

  const PreparedData data =
      prepare(dataset, config.model.input_len, config.model.pred_len, tc.split, tc.stride);
  ArmModel model(config.model, tc.seed);
  ParameterStore& params = model.parameters();
  Adam adam(params, tc.adam_beta1, tc.adam_beta2, tc.adam_eps);

  const std::size_t n_train = data.train.size();
  const std::size_t batch = std::min(tc.batch_size, n_train);
  const std::size_t per_epoch = (n_train + batch - 1) / batch;
  const std::size_t total_steps = per_epoch * tc.epochs;
  const std::size_t threads = std::max<std::size_t>(1, std::min(tc.threads, batch));

  const Rng root(tc.seed);
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Gradients> partial(threads, Gradients(params));
  std::vector<double> partial_loss(threads);
  Gradients grads(params);

  RunReport report;
  report.seed = tc.seed;
  report.config_hash = config_hash(config);
  report.parameter_count = params.scalar_count();
  report.train_windows = n_train;
  EarlyStopper stopper(tc.patience);
  std::vector<Tensor> best = snapshot(params);
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    Rng shuffler = root.derive(1, epoch);
    std::shuffle(order.begin(), order.end(), shuffler.engine());
    double epoch_loss = 0.0;
    double lr = 0.0;

    for (std::size_t b = 0; b < per_epoch; ++b, ++step) {
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(begin + batch, n_train);
      const std::size_t size = end - begin;
      lr = lr_at(step + 1, total_steps, tc.lr, tc.warmup);

      std::optional<DropMask> mask;
      if (tc.rd.enabled) {
        Rng mask_rng = root.derive(2, step);
        mask = sample_mask(c, mask_rng, tc.rd.max_rate);
      }
      const std::vector<bool>* loss_keep =
          (mask && !tc.rd.loss_on_dropped) ? &mask->keep : nullptr;

      for (auto& g : partial) g.zero();
      std::fill(partial_loss.begin(), partial_loss.end(), 0.0);
      try {
        parallel_chunks(size, threads, [&](std::size_t w, std::size_t lo, std::size_t hi) {
          for (std::size_t k = lo; k < hi; ++k) {
            const SeriesWindow win = data.train[order[begin + k]];
            Tensor input = win.input, target = win.target;
            if (mask) std::tie(input, target) = apply_mask(input, target, *mask);
            Graph g(&params);
            Rng sample_rng = root.derive(3, step, k);
            std::vector<Var> aux;
            ForwardContext ctx{true, &sample_rng, &aux};
            Var loss = forecast_loss(model.forward(g, input, ctx), target, loss_keep);
            for (Var a : aux) loss = loss + a;
            g.backward(loss);
            g.collect(partial[w]);
            partial_loss[w] += loss.value()[0];
          }
        });
      } catch (const NumericError& e) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + ", batch " + std::to_string(b) + " (windows " +
                           std::to_string(begin) + "-" + std::to_string(end - 1) +
                           " of the shuffled order), seed " + std::to_string(tc.seed) + ": " +
                           e.what());
      }

      grads.zero();
      double batch_loss = 0.0;
      for (std::size_t w = 0; w < threads; ++w) {
        grads.add(partial[w]);
        batch_loss += partial_loss[w];
      }
      grads.scale(1.0 / static_cast<double>(size));
      batch_loss /= static_cast<double>(size);
      if (!std::isfinite(batch_loss))
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(step) + ", batch " + std::to_string(b) + ", seed " +
                           std::to_string(tc.seed) + ": loss is not finite");
      if (tc.grad_clip > 0.0) {
        const double norm = std::sqrt(grads.squared_norm());
        if (norm > tc.grad_clip) grads.scale(tc.grad_clip / norm);
      }
      adam.step(params, grads, lr);
      model.clamp_parameters();
      epoch_loss += batch_loss;
    }

    const Metrics val = evaluate(model, data.val, tc.threads);
    EpochRecord rec{epoch, epoch_loss / static_cast<double>(per_epoch), val.mse, val.mae, lr,
                    seconds_since(epoch_start)};
    report.epochs.push_back(rec);
    if (stopper.update(val.mse)) best = snapshot(params);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (stopper.should_stop()) {
      report.early_stopped = true;
      break;
    }
  }

  restore(params, best);
  report.best_epoch = stopper.best_index();
  report.best_val_mse = stopper.best_score();
  report.test = evaluate(model, data.test, tc.threads);
  report.repeat_test = repeat_baseline(data.test);
  report.steps = step;
  report.wall_seconds = seconds_since(started);
  return {std::move(report), make_checkpoint(config, model, data.scaler)};
}

}  // namespace arm
