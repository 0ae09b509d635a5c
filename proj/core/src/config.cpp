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

#include "arm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <variant>

#include "arm/errors.hpp"

namespace arm {
namespace {

using FieldRef = std::variant<bool*, double*, std::size_t*, std::string*, std::vector<std::size_t>*>;

struct Field {
  const char* key;
  FieldRef ref;
};

std::vector<Field> fields(RunConfig& c) {
  ModelConfig& m = c.model;
  TrainConfig& t = c.train;
  return {
      {"model.input_len", &m.input_len},
      {"model.pred_len", &m.pred_len},
      {"model.channels", &m.channels},
      {"auel.distribution", &m.auel.distribution},
      {"auel.temporal", &m.auel.temporal},
      {"auel.eps", &m.auel.eps},
      {"auel.alpha_init", &m.auel.alpha_init},
      {"auel.windows", &m.auel.windows},
      {"moe.experts", &m.moe.experts},
      {"moe.hidden_mult", &m.moe.hidden_mult},
      {"moe.dropout", &m.moe.dropout},
      {"moe.activation", &m.moe.activation},
      {"moe.load_balance", &m.moe.load_balance},
      {"moe.router_init", &m.moe.router_init},
      {"mkls.pre", &m.mkls.pre},
      {"mkls.post", &m.mkls.post},
      {"mkls.kernels", &m.mkls.kernels},
      {"mkls.dropout", &m.mkls.dropout},
      {"backbone.d_model", &m.backbone.d_model},
      {"backbone.heads", &m.backbone.heads},
      {"backbone.encoder_layers", &m.backbone.encoder_layers},
      {"backbone.decoder_layers", &m.backbone.decoder_layers},
      {"backbone.ffn_mult", &m.backbone.ffn_mult},
      {"backbone.decoder_dropout", &m.backbone.decoder_dropout},
      {"backbone.label_prepend", &m.backbone.label_prepend},
      {"backbone.label_len", &m.backbone.label_len},
      {"train.lr", &t.lr},
      {"train.epochs", &t.epochs},
      {"train.patience", &t.patience},
      {"train.warmup", &t.warmup},
      {"train.batch_size", &t.batch_size},
      {"train.seed", &t.seed},
      {"train.threads", &t.threads},
      {"train.grad_clip", &t.grad_clip},
      {"train.adam_beta1", &t.adam_beta1},
      {"train.adam_beta2", &t.adam_beta2},
      {"train.adam_eps", &t.adam_eps},
      {"train.stride", &t.stride},
      {"rd.enabled", &t.rd.enabled},
      {"rd.max_rate", &t.rd.max_rate},
      {"rd.loss_on_dropped", &t.rd.loss_on_dropped},
      {"data.train", &t.split.train},
      {"data.val", &t.split.val},
      {"data.test", &t.split.test},
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + what);
}

std::size_t parse_count(std::string_view key, const std::string& v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

void assign(std::string_view key, const std::string& v, bool* dst) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") {
    *dst = true;
  } else if (v == "false" || v == "0" || v == "off" || v == "no") {
    *dst = false;
  } else {
    bad_value(key, v, "a boolean");
  }
}

void assign(std::string_view key, const std::string& v, double* dst) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) bad_value(key, v, "a number");
  *dst = d;
}

void assign(std::string_view key, const std::string& v, std::size_t* dst) { *dst = parse_count(key, v); }

void assign(std::string_view, const std::string& v, std::string* dst) { *dst = v; }

void assign(std::string_view key, const std::string& v, std::vector<std::size_t>* dst) {
  dst->clear();
  std::string_view rest = v;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = trim(rest.substr(0, comma));
    if (!item.empty()) dst->push_back(parse_count(key, item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
}

std::string format_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

std::string format(const FieldRef& ref) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_cvref_t<decltype(*p)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(*p);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
          return std::to_string(*p);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return *p;
        } else {
          std::string s;
          for (std::size_t i = 0; i < p->size(); ++i) {
            if (i) s += ',';
            s += std::to_string((*p)[i]);
          }
          return s;
        }
      },
      ref);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

RunConfig parse_config(std::string_view text, RunConfig base) {
  RunConfig c = std::move(base);
  auto table = fields(c);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return key == f.key; });
    if (it == table.end())
      throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    std::visit([&](auto* p) { assign(key, value, p); }, it->ref);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& config) {
  RunConfig copy = config;
  std::string out;
  for (const Field& f : fields(copy)) {
    out += f.key;
    out += " = ";
    out += format(f.ref);
    out += '\n';
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const ModelConfig& m) {
  require(m.input_len >= 2, "model.input_len must be >= 2");
  require(m.pred_len >= 1, "model.pred_len must be >= 1");
  require(m.channels >= 1, "model.channels must be >= 1");
  require(m.auel.eps > 0.0, "auel.eps must be > 0");
  require(m.auel.alpha_init > 0.0 && m.auel.alpha_init < 1.0, "auel.alpha_init must lie in (0, 1)");
  for (std::size_t w : m.auel.windows)
    require(w >= 2 && w <= m.input_len,
            "auel.windows entry " + std::to_string(w) + " outside [2, input_len]");
  require(std::is_sorted(m.auel.windows.begin(), m.auel.windows.end()),
          "auel.windows must be ascending");
  require(m.moe.experts >= 1, "moe.experts must be >= 1");
  require(m.moe.hidden_mult >= 1, "moe.hidden_mult must be >= 1");
  require(m.moe.dropout >= 0.0 && m.moe.dropout < 1.0, "moe.dropout must lie in [0, 1)");
  require(m.moe.activation == "gelu" || m.moe.activation == "identity",
          "moe.activation must be gelu or identity");
  require(m.moe.load_balance >= 0.0, "moe.load_balance must be >= 0");
  require(!m.mkls.kernels.empty(), "mkls.kernels must not be empty");
  for (std::size_t k : m.mkls.kernels) require(k >= 1, "mkls.kernels entries must be >= 1");
  require(m.mkls.dropout >= 0.0 && m.mkls.dropout < 1.0, "mkls.dropout must lie in [0, 1)");
  const auto& b = m.backbone;
  require(b.d_model >= 1 && b.heads >= 1, "backbone.d_model and backbone.heads must be >= 1");
  require(b.d_model % b.heads == 0, "backbone.d_model must be divisible by backbone.heads");
  require(b.encoder_layers >= 1 && b.decoder_layers >= 1, "backbone needs >= 1 encoder and decoder layer");
  require(b.ffn_mult >= 1, "backbone.ffn_mult must be >= 1");
  require(b.decoder_dropout >= 0.0 && b.decoder_dropout < 1.0, "backbone.decoder_dropout must lie in [0, 1)");
  require(b.label_len <= m.input_len, "backbone.label_len must be <= input_len");
}

void validate(const RunConfig& config) {
  validate(config.model);
  const TrainConfig& t = config.train;
  require(t.lr > 0.0, "train.lr must be > 0");
  require(t.epochs >= 1, "train.epochs must be >= 1");
  require(t.patience >= 1, "train.patience must be >= 1");
  require(t.warmup >= 0.0 && t.warmup < 1.0, "train.warmup must lie in [0, 1)");
  require(t.batch_size >= 1, "train.batch_size must be >= 1");
  require(t.threads >= 1, "train.threads must be >= 1");
  require(t.grad_clip >= 0.0, "train.grad_clip must be >= 0");
  require(t.stride >= 1, "train.stride must be >= 1");
  require(t.rd.max_rate >= 0.0 && t.rd.max_rate < 1.0, "rd.max_rate must lie in [0, 1)");
  const auto& s = t.split;
  require(s.train > 0.0 && s.val > 0.0 && s.test > 0.0, "split fractions must be positive");
  require(std::abs(s.train + s.val + s.test - 1.0) < 1e-9, "split fractions must sum to 1");
}

std::vector<std::size_t> resolved_windows(const ModelConfig& config) {
  if (!config.auel.windows.empty()) return config.auel.windows;
  std::vector<std::size_t> w;
  const double factor =
      config.input_len < 720 ? static_cast<double>(config.input_len) / 720.0 : 1.0;
  for (std::size_t k : config.mkls.kernels) {
    auto scaled = static_cast<std::size_t>(std::lround(static_cast<double>(k) * factor));
    w.push_back(std::clamp<std::size_t>(scaled, 2, config.input_len));
  }
  std::sort(w.begin(), w.end());
  return w;
}

}  // namespace arm
