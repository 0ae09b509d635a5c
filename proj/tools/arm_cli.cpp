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

// arm: train, evaluate and inspect ARM forecasters from the command line.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "arm/checkpoint.hpp"
#include "arm/config.hpp"
#include "arm/data.hpp"
#include "arm/errors.hpp"
#include "arm/module_check.hpp"
#include "arm/trainer.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw arm::DataError("cannot write " + path.string());
  out << text;
}

int run_train(const std::string& config_path, const std::string& data_path,
              const std::string& out_dir, std::size_t threads, bool quiet) {
  arm::RunConfig config = arm::load_config(config_path);
  if (threads > 0) config.train.threads = threads;
  const arm::Dataset data = arm::load_csv(data_path);
  fs::create_directories(out_dir);

  arm::TrainHooks hooks;
  if (!quiet) {
    hooks.on_epoch = [](const arm::EpochRecord& r) {
      std::printf("epoch %3zu  train %.6f  val mse %.6f  mae %.6f  lr %.3g  (%.1fs)\n", r.epoch,
                  r.train_loss, r.val_mse, r.val_mae, r.lr, r.seconds);
      std::fflush(stdout);
    };
  }
  const arm::TrainResult result = arm::train(config, data, hooks);
  const fs::path out(out_dir);
  arm::write_checkpoint(result.checkpoint, out / "checkpoint.armckpt");
  write_text(out / "report.json", result.report.to_json() + "\n");
  write_text(out / "epochs.csv", result.report.epochs_csv());

  const auto& r = result.report;
  std::printf("best epoch %zu  val mse %.6f  test mse %.6f  mae %.6f  repeat mse %.6f%s\n",
              r.best_epoch, r.best_val_mse, r.test.mse, r.test.mae, r.repeat_test.mse,
              r.early_stopped ? "  (early stop)" : "");
  std::printf("wrote %s\n", (out / "checkpoint.armckpt").string().c_str());
  return 0;
}

int run_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                 const std::string& split_name, std::size_t threads) {
  const arm::Split split = arm::parse_split(split_name);
  const arm::LoadedModel loaded = arm::load_model(arm::read_checkpoint(checkpoint_path));
  const arm::Dataset data = arm::load_csv(data_path);
  if (data.channels() != loaded.config.model.channels)
    throw arm::DataError("data has " + std::to_string(data.channels()) +
                         " columns, checkpoint expects " +
                         std::to_string(loaded.config.model.channels));
  // windows come from the checkpoint's own split and standardisation
  const arm::SplitBounds bounds = arm::split_bounds(data.length(), loaded.config.train.split);
  const arm::Tensor rows =
      arm::slice_rows(data.values, bounds.begin(split), bounds.end(split));
  const arm::WindowSet windows =
      arm::make_windows(loaded.scaler.apply(rows), loaded.config.model.input_len,
                        loaded.config.model.pred_len, loaded.config.train.stride);
  const arm::Metrics m = arm::evaluate(loaded.model, windows, threads);
  const arm::Metrics rep = arm::repeat_baseline(windows);

  nlohmann::json j;
  j["split"] = arm::to_string(split);
  j["windows"] = m.windows;
  j["mse"] = m.mse;
  j["mae"] = m.mae;
  j["channel_mse"] = m.channel_mse;
  j["repeat"] = {{"mse", rep.mse}, {"mae", rep.mae}, {"channel_mse", rep.channel_mse}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_generate(std::size_t length, const std::vector<std::size_t>& shifts, std::uint64_t seed,
                 const std::string& out) {
  arm::MultiOptions options;
  options.length = length;
  options.shifts = shifts;
  options.seed = seed;
  const arm::Dataset ds = arm::generate_multi(options);
  arm::save_csv(ds, out);
  std::printf("wrote %zu x %zu series to %s\n", ds.length(), ds.channels(), out.c_str());
  return 0;
}

int run_gradcheck(const std::string& module, std::uint64_t seed) {
  const auto reports = arm::check_module(module, seed);
  int failed = 0;
  for (const auto& r : reports) {
    std::printf("%s\n", r.summary().c_str());
    if (r.status == arm::GradCheckStatus::kFail) ++failed;
  }
  std::printf("%zu checks, %d failed\n", reports.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARM multivariate forecaster"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_dir, checkpoint_path, split = "test", module = "all";
  std::size_t threads = 0;
  bool quiet = false;

  auto* train = app.add_subcommand("train", "train a model and write checkpoint and report");
  train->add_option("--config", config_path, "key = value config file")->required()->check(CLI::ExistingFile);
  train->add_option("--data", data_path, "CSV dataset")->required()->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--threads", threads, "override train.threads");
  train->add_flag("--quiet", quiet, "suppress per-epoch lines");

  auto* evaluate = app.add_subcommand("evaluate", "MSE/MAE of a checkpoint on one split");
  evaluate->add_option("--checkpoint", checkpoint_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", split, "train, val or test")->capture_default_str();
  evaluate->add_option("--threads", threads);

  std::size_t length = 18000;
  std::vector<std::size_t> shifts{96, 192, 336, 720};
  std::uint64_t seed = 2024;
  std::string out_csv;
  auto* generate = app.add_subcommand("generate-multi", "write the synthetic Multi dataset");
  generate->add_option("--length", length)->capture_default_str();
  generate->add_option("--shifts", shifts, "four lags, comma separated")
      ->delimiter(',')
      ->expected(4)
      ->capture_default_str();
  generate->add_option("--seed", seed)->capture_default_str();
  generate->add_option("--out", out_csv)->required();

  std::uint64_t check_seed = 1;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gradcheck->add_option("--module", module, "tensor, auel, moe, mkls, backbone or all")
      ->capture_default_str();
  gradcheck->add_option("--seed", check_seed)->capture_default_str();

  auto* print_config = app.add_subcommand("print-config", "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(config_path, data_path, out_dir, threads, quiet);
    if (*evaluate) return run_evaluate(checkpoint_path, data_path, split, threads ? threads : 1);
    if (*generate) return run_generate(length, shifts, seed, out_csv);
    if (*gradcheck) return run_gradcheck(module, check_seed);
    if (*print_config) {
      std::cout << arm::to_text(arm::RunConfig{});
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
