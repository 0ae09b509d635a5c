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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails. Training artifacts go under --workdir.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "arm/auel.hpp"
#include "arm/checkpoint.hpp"
#include "arm/config.hpp"
#include "arm/data.hpp"
#include "arm/errors.hpp"
#include "arm/gradcheck.hpp"
#include "arm/mkls.hpp"
#include "arm/model.hpp"
#include "arm/module.hpp"
#include "arm/module_check.hpp"
#include "arm/ops.hpp"
#include "arm/random_dropping.hpp"
#include "arm/rng.hpp"
#include "arm/trainer.hpp"

namespace fs = std::filesystem;

namespace arm {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome gradient_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t checked = 0, failed = 0;
  std::set<std::string> covered;
  for (const char* module : {"auel", "moe", "mkls", "backbone"}) {
    for (const GradCheckReport& r : check_module(module, 1)) {
      checked += r.checked;
      worst = std::max(worst, r.max_rel_error);
      if (r.status == GradCheckStatus::kFail || r.max_rel_error > 1e-4) ++failed;
    }
  }
  // every parameter of the toy model falls under one of the checked prefixes
  ArmModel toy(toy_model_config(), 1);
  std::size_t uncovered = 0;
  for (const std::string& name : toy.parameters().names()) {
    const bool ok = name.rfind("auel.", 0) == 0 || name.rfind("moe.", 0) == 0 ||
                    name.rfind("mkls.", 0) == 0 || name.rfind("backbone.", 0) == 0;
    if (!ok) ++uncovered;
  }
  const double secs = seconds_since(t0);
  return {failed == 0 && uncovered == 0 && secs <= 120.0,
          std::to_string(checked) + " coordinates, max rel err " + fmt("%.2e", worst) + ", " +
              fmt("%.1f", secs) + " s"};
}

Outcome ema_limits() {
  Rng rng(101);
  double worst_last = 0.0, worst_mean = 0.0;
  for (int s = 0; s < 100; ++s) {
    Tensor x = Tensor::matrix(64, 1);
    for (double& v : x.values()) v = rng.uniform();
    Graph g;
    const double e0 = ops::ema_mean(g.constant(x), g.constant(Tensor::from_rows({{1e-6}}))).value()[0];
    const double e1 =
        ops::ema_mean(g.constant(x), g.constant(Tensor::from_rows({{1.0 - 1e-6}}))).value()[0];
    worst_last = std::max(worst_last, std::abs(e0 - x[63]));
    worst_mean = std::max(worst_mean, std::abs(e1 - x.sum() / 64.0));
  }
  return {worst_last <= 1e-6 && worst_mean <= 1e-3,
          "max |E-last| " + fmt("%.2e", worst_last) + ", max |E-mean| " + fmt("%.2e", worst_mean)};
}

Outcome revin_degeneration() {
  Rng rng(202);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    ModelConfig c;
    c.input_len = 64;
    c.pred_len = 1;
    c.channels = 5;
    c.auel.windows = {64};
    ParameterStore store;
    Auel auel(store, c);
    store.value(auel.alpha_id()).fill(1.0 - 1e-6);
    for (double& v : store.value(auel.gamma_id()).values()) v = rng.uniform(0.5, 2.0);
    for (double& v : store.value(auel.beta_id()).values()) v = rng.normal();
    Tensor x = Tensor::matrix(64, 5);
    for (double& v : x.values()) v = rng.normal(0.0, 3.0);
    Graph g(&store);
    Var xv = g.constant(x);
    const Tensor y = auel.preprocess(g, xv, auel.stats(g, xv)).value();
    for (std::size_t j = 0; j < 5; ++j) {
      double m = 0.0, var = 0.0;
      for (std::size_t t = 0; t < 64; ++t) m += x(t, j) / 64.0;
      for (std::size_t t = 0; t < 64; ++t) var += (x(t, j) - m) * (x(t, j) - m) / 64.0;
      const double gamma = store.value(auel.gamma_id())[j], beta = store.value(auel.beta_id())[j];
      for (std::size_t t = 0; t < 64; ++t) {
        const double want = gamma * (x(t, j) - m) / (std::sqrt(var) + c.auel.eps) + beta;
        worst = std::max(worst, std::abs(y(t, j) - want));
      }
    }
  }
  return {worst <= 1e-3, "max abs err " + fmt("%.2e", worst) + " over 20 random 64x5 inputs"};
}

Outcome mkls_identity() {
  Rng rng(303);
  std::size_t exact = 0, query_exact = 0;
  for (int s = 0; s < 50; ++s) {
    const std::size_t l = 1 + static_cast<std::size_t>(rng.uniform() * 60);
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    MklsConfig cfg;
    cfg.kernels = {1 + 2 * static_cast<std::size_t>(rng.uniform() * 10), 25, 145};
    ParameterStore store;
    PreMkls pre(store, "mkls", l, d, cfg, rng);
    Tensor x = Tensor::matrix(l, d);
    for (double& v : x.values()) v = rng.normal(0.0, 2.0);
    Graph g(&store);
    Rng drop(static_cast<std::uint64_t>(s));
    ForwardContext train{true, &drop, nullptr};
    if (pre.mkls().forward(g, g.constant(x), ForwardContext{}).value() == x &&
        pre.mkls().forward(g, g.constant(x), train).value() == x)
      ++exact;
    store.value(pre.query_position()).fill(0.0);
    if (pre.query(g, g.constant(x), ForwardContext{}).value() == x) ++query_exact;
  }
  return {exact == 50 && query_exact == 50,
          std::to_string(exact) + "/50 identity, " + std::to_string(query_exact) + "/50 query == X"};
}

Outcome kernel_dropout_expectation() {
  Graph g;
  std::vector<Var> stack{g.constant(Tensor::matrix(4, 3, 1.0)), g.constant(Tensor::matrix(4, 3, 2.0)),
                         g.constant(Tensor::matrix(4, 3, 3.0))};
  const double plain = kernel_dropout_avg(g, stack, 0.25, nullptr, false).value()[0];
  Rng rng(404);
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) total += kernel_dropout_avg(g, stack, 0.25, &rng, true).value()[0];
  const double mc = total / 10000.0;
  const double rel = std::abs(mc - plain) / plain;
  return {rel <= 0.02, "MC mean " + fmt("%.4f", mc) + " vs " + fmt("%.4f", plain) + " (rel " +
                           fmt("%.3f", rel) + ")"};
}

Outcome random_dropping_contract() {
  Rng rng(505);
  Tensor input = Tensor::matrix(6, 8), target = Tensor::matrix(3, 8);
  for (double& v : input.values()) v = 1.0 + rng.uniform();
  for (double& v : target.values()) v = 1.0 + rng.uniform();
  std::size_t mismatched = 0, wrong_count = 0;
  double dropped = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const DropMask m = sample_mask(8, rng);
    if (m.dropped() != static_cast<std::size_t>(std::floor(m.rate * 8.0))) ++wrong_count;
    auto [mi, mt] = apply_mask(input, target, m);
    for (std::size_t c = 0; c < 8; ++c) {
      const bool in_zero = mi(0, c) == 0.0, tg_zero = mt(0, c) == 0.0;
      if (in_zero != tg_zero || in_zero == m.keep[c]) ++mismatched;
    }
    dropped += static_cast<double>(m.dropped()) / 8.0;
  }
  double expected = 0.0;
  for (std::size_t k = 0; k < 8; ++k) {
    const double lo = k / 8.0, hi = std::min((k + 1) / 8.0, 0.99);
    if (hi > lo) expected += static_cast<double>(k) * (hi - lo);
  }
  expected /= 0.99 * 8.0;
  const double fraction = dropped / 10000.0;
  const double rel = std::abs(fraction - expected) / expected;

  // evaluation must not draw masks
  ModelConfig mc = toy_model_config();
  mc.channels = 8;
  ArmModel model(mc, 1);
  Tensor series = Tensor::matrix(40, 8);
  for (double& v : series.values()) v = rng.normal();
  const WindowSet windows = make_windows(series, mc.input_len, mc.pred_len);
  const auto before = mask_draw_count();
  evaluate(model, windows, 2);
  const auto probes = mask_draw_count() - before;

  return {mismatched == 0 && wrong_count == 0 && rel <= 0.02 && probes == 0,
          "mask mismatches " + std::to_string(mismatched) + ", count errors " +
              std::to_string(wrong_count) + ", dropped fraction " + fmt("%.4f", fraction) +
              " vs " + fmt("%.4f", expected) + ", eval probes " + std::to_string(probes)};
}

std::size_t multi_violations(const Dataset& d, const std::vector<std::size_t>& shifts) {
  const Tensor& v = d.values;
  std::size_t bad = 0;
  for (std::size_t t = 0; t < d.length(); ++t) {
    for (std::size_t k = 0; k < 4; ++k)
      if (t >= shifts[k] && v(t, k + 1) != v(t - shifts[k], 0)) ++bad;
    if (v(t, 5) != (v(t, 1) + v(t, 2)) / 2.0) ++bad;
    if (v(t, 6) != (v(t, 1) + v(t, 2) + v(t, 3) + v(t, 4)) / 4.0) ++bad;
    if (v(t, 7) != v(t, 1) * v(t, 2)) ++bad;
  }
  return bad;
}

Outcome multi_exactness() {
  const MultiOptions full{};
  const MultiOptions desk{2000, {8, 16, 24, 48}, 2024, 2000};
  const std::size_t a = multi_violations(generate_multi(full), full.shifts);
  const std::size_t b = multi_violations(generate_multi(desk), desk.shifts);
  return {a == 0 && b == 0, "violations: default " + std::to_string(a) + ", desk " + std::to_string(b)};
}

Outcome metric_oracle() {
  Tensor series = Tensor::matrix(12, 3);
  Rng rng(909);
  for (double& v : series.values()) v = rng.normal();
  const WindowSet w = make_windows(series, 4, 4);
  auto predictor = [](const Tensor& x) {
    Tensor y = Tensor::matrix(4, x.cols());
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t c = 0; c < x.cols(); ++c) y(t, c) = 0.3 * x(3 - t, c) + 0.1;
    return y;
  };
  double se = 0.0, ae = 0.0, n = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const SeriesWindow win = w[i];
    const Tensor y = predictor(win.input);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t c = 0; c < 3; ++c) {
        const double e = y(t, c) - win.target(t, c);
        se += e * e;
        ae += std::abs(e);
        n += 1.0;
      }
  }
  const Metrics m = evaluate_predictor(w, predictor);
  const double err = std::max(std::abs(m.mse - se / n), std::abs(m.mae - ae / n));
  const double constant = repeat_baseline(make_windows(Tensor::matrix(30, 2, 4.5), 6, 3)).mse;
  return {w.size() == 5 && err <= 1e-12 && constant == 0.0,
          std::to_string(w.size()) + " windows, max diff " + fmt("%.1e", err) + ", repeat on constant " +
              fmt("%.1f", constant)};
}

Outcome toggle_census() {
  RunConfig base;
  base.model.input_len = 16;
  base.model.pred_len = 4;
  base.model.channels = 8;
  base.model.mkls.kernels = {3, 7};
  base.model.backbone.d_model = 8;
  base.model.backbone.heads = 2;
  base.train.epochs = 1;
  base.train.batch_size = 32;
  base.train.lr = 1e-3;
  auto has_prefix = [](const ParameterStore& p, const char* prefix) {
    for (const std::string& n : p.names())
      if (n.rfind(prefix, 0) == 0) return true;
    return false;
  };
  std::vector<std::string> problems;
  for (int a = 0; a < 2; ++a)
    for (int m = 0; m < 2; ++m) {
      ModelConfig mc = base.model;
      mc.auel.distribution = mc.auel.temporal = a == 1;
      mc.mkls.pre = mc.mkls.post = m == 1;
      ArmModel model(mc, 1);
      const ParameterStore& p = model.parameters();
      if (has_prefix(p, "auel.") != (a == 1) || has_prefix(p, "moe.") != (a == 1) ||
          has_prefix(p, "mkls.") != (m == 1))
        problems.push_back("A=" + std::to_string(a) + " M=" + std::to_string(m));
    }
  const Dataset data = generate_multi({300, {8, 16, 24, 48}, 3, 2000});
  RunConfig off = base;
  off.model.auel.distribution = off.model.auel.temporal = false;
  off.model.mkls.pre = off.model.mkls.post = false;
  off.train.rd.enabled = false;
  const auto draws0 = mask_draw_count();
  const TrainResult plain = train(off, data);
  const auto draws_off = mask_draw_count() - draws0;
  std::size_t arrays = 0, strays = 0;
  for (const auto& [name, t] : plain.checkpoint.arrays) {
    ++arrays;
    if (name.rfind("backbone.", 0) != 0 && name != "data.mean" && name != "data.std") ++strays;
  }
  RunConfig rd_on = off;
  rd_on.train.rd.enabled = true;
  const auto draws1 = mask_draw_count();
  const TrainResult masked = train(rd_on, data);
  const auto draws_on = mask_draw_count() - draws1;
  if (draws_off != 0 || draws_on != masked.report.steps) problems.push_back("R draws");
  if (strays != 0) problems.push_back(std::to_string(strays) + " non-backbone arrays");
  std::string detail = "all-off checkpoint: " + std::to_string(arrays) + " arrays, " +
                       std::to_string(strays) + " outside backbone/data stats; mask draws off/on " +
                       std::to_string(draws_off) + "/" + std::to_string(draws_on);
  for (const std::string& p : problems) detail += "; problem " + p;
  return {problems.empty(), detail};
}

struct DeskRuns {
  RunReport full, repeat_run, ablated;
  bool ok = false;
  std::string error;
};

DeskRuns desk_runs(const fs::path& workdir, std::size_t threads) {
  DeskRuns out;
  try {
    RunConfig config = load_config(ARM_DESK_CONFIG);
    config.train.threads = threads;
    const Dataset data = generate_multi({2000, {8, 16, 24, 48}, 2024, 2000});
    fs::create_directories(workdir);
    save_csv(data, workdir / "multi_desk.csv");
    auto run = [&](const RunConfig& c, const std::string& name) {
      std::printf("  training %s ...\n", name.c_str());
      std::fflush(stdout);
      TrainResult r = train(c, data);
      const fs::path dir = workdir / name;
      fs::create_directories(dir);
      write_checkpoint(r.checkpoint, dir / "checkpoint.armckpt");
      std::ofstream(dir / "report.json") << r.report.to_json() << '\n';
      std::ofstream(dir / "epochs.csv") << r.report.epochs_csv();
      std::printf("  %s: best epoch %zu, test mse %.6f, repeat mse %.6f, %.0f s\n", name.c_str(),
                  r.report.best_epoch, r.report.test.mse, r.report.repeat_test.mse,
                  r.report.wall_seconds);
      std::fflush(stdout);
      return r.report;
    };
    out.full = run(config, "arm_full");
    RunConfig ablated = config;
    ablated.train.rd.enabled = false;
    ablated.model.mkls.pre = false;
    ablated.model.mkls.post = false;
    out.ablated = run(ablated, "arm_no_rd_no_mkls");
    out.repeat_run = run(config, "arm_full_repeat");
    out.ok = true;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

Outcome inter_series(const DeskRuns& runs) {
  if (!runs.ok) return {false, "training failed: " + runs.error};
  const double arm = runs.full.test.mse, repeat = runs.full.repeat_test.mse;
  const double ablated = runs.ablated.test.mse;
  const double r1 = arm / repeat, r2 = arm / ablated;
  return {r1 <= 0.5 && r2 <= 0.8,
          "ARM " + fmt("%.6f", arm) + ", Repeat " + fmt("%.6f", repeat) + " (ratio " + fmt("%.3f", r1) +
              " <= 0.5), no RD/MKLS " + fmt("%.6f", ablated) + " (ratio " + fmt("%.3f", r2) +
              " <= 0.8), wall " + fmt("%.0f", runs.full.wall_seconds + runs.ablated.wall_seconds) + " s"};
}

Outcome determinism(const DeskRuns& runs) {
  if (!runs.ok) return {false, "training failed: " + runs.error};
  const auto& a = runs.full.epochs;
  const auto& b = runs.repeat_run.epochs;
  bool same = a.size() == b.size() && !a.empty();
  for (std::size_t i = 0; same && i < a.size(); ++i)
    same = a[i].train_loss == b[i].train_loss && a[i].val_mse == b[i].val_mse;
  return {same, std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                    " epochs, per-epoch losses " + (same ? "identical" : "differ")};
}

}  // namespace
}  // namespace arm

int main(int argc, char** argv) {
  using namespace arm;
  fs::path workdir = fs::temp_directory_path() / "arm_acceptance";
  std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
  bool skip_training = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else if (arg == "--threads" && i + 1 < argc) {
      threads = std::stoul(argv[++i]);
    } else if (arg == "--skip-training") {
      skip_training = true;
    } else {
      std::fprintf(stderr, "usage: %s [--workdir DIR] [--threads N] [--skip-training]\n", argv[0]);
      return 2;
    }
  }

  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient suite", guarded(gradient_suite));
  report(2, "EMA limit properties", guarded(ema_limits));
  report(3, "RevIN degeneration", guarded(revin_degeneration));
  report(4, "MKLS residual identity", guarded(mkls_identity));
  report(5, "kernel-dropout expectation", guarded(kernel_dropout_expectation));
  report(6, "Random Dropping contract", guarded(random_dropping_contract));
  report(7, "Multi generator exactness", guarded(multi_exactness));
  report(9, "metric oracle", guarded(metric_oracle));
  report(11, "ablation toggles", guarded(toggle_census));
  if (skip_training) {
    std::printf("SKIP [8] desk-scale inter-series learning\nSKIP [10] determinism\n");
  } else {
    const DeskRuns runs = desk_runs(workdir, threads);
    report(8, "desk-scale inter-series learning", inter_series(runs));
    report(10, "determinism", determinism(runs));
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
