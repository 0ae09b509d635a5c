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

#include "arm/data.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "arm/errors.hpp"
#include "arm/rng.hpp"

namespace arm {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  out = std::strtod(cell.c_str(), &end);
  return end == cell.c_str() + cell.size() && std::isfinite(out);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string hourly_stamp(std::size_t hour) {
  using namespace std::chrono;
  const sys_days origin = year{2016} / July / 1;
  const auto tp = origin + hours(static_cast<long long>(hour));
  const auto day = floor<days>(tp);
  const year_month_day ymd{day};
  const auto h = duration_cast<hours>(tp - day).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02lld:00:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long long>(h));
  return buf;
}

}  // namespace

Dataset parse_csv(std::string_view text, std::string name) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError("csv '" + name + "': file is empty");

  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError("csv '" + name + "': row " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    rows.push_back(std::move(cells));
    row_lines.push_back(lineno);
  }
  if (rows.empty()) throw DataError("csv '" + name + "': no data rows");

  const std::string first = lower(header.front());
  double probe = 0.0;
  const bool stamped = first == "date" || first == "timestamp" || first == "time" ||
                       (header.size() > 1 && !parse_number(rows.front().front(), probe));
  const std::size_t skip = stamped ? 1 : 0;
  if (header.size() <= skip) throw DataError("csv '" + name + "': no value columns");

  Dataset ds;
  ds.name = std::move(name);
  ds.columns.assign(header.begin() + static_cast<std::ptrdiff_t>(skip), header.end());
  const std::size_t c = ds.columns.size();
  ds.values = Tensor::matrix(rows.size(), c);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t j = 0; j < c; ++j) {
      const std::string& cell = rows[r][j + skip];
      double v = 0.0;
      if (!parse_number(cell, v)) {
        throw DataError("csv '" + ds.name + "': row " + std::to_string(row_lines[r]) +
                        ", column '" + ds.columns[j] + "': " +
                        (cell.empty() ? std::string("missing value") : "non-numeric cell '" + cell + "'"));
      }
      ds.values(r, j) = v;
    }
  }
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open csv file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path.stem().string());
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write csv file " + path.string());
  out << "date";
  for (const auto& c : dataset.columns) out << ',' << c;
  out << '\n';
  char buf[40];
  for (std::size_t r = 0; r < dataset.length(); ++r) {
    out << hourly_stamp(r);
    for (std::size_t j = 0; j < dataset.channels(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", dataset.values(r, j));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing csv file " + path.string());
}

Dataset generate_multi(const MultiOptions& options) {
  if (options.shifts.size() != 4)
    throw ConfigError("generate_multi: exactly four shifts are required");
  for (std::size_t s : options.shifts) {
    if (s >= options.burn_in)
      throw ConfigError("generate_multi: shift " + std::to_string(s) +
                        " must be smaller than the burn-in of " + std::to_string(options.burn_in));
  }
  if (options.length == 0) throw ConfigError("generate_multi: length must be positive");

  const std::size_t n = options.length + options.burn_in;
  Rng rng(options.seed);
  std::vector<double> walk(n);
  double level = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    level += rng.normal();
    walk[t] = level;
  }

  Dataset ds;
  ds.name = "multi";
  ds.frequency = "h";
  ds.columns = {"x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"};
  ds.values = Tensor::matrix(options.length, 8);
  const auto& sh = options.shifts;
  for (std::size_t t = 0; t < options.length; ++t) {
    const std::size_t base = options.burn_in + t;
    const double x1 = walk[base];
    const double x2 = walk[base - sh[0]];
    const double x3 = walk[base - sh[1]];
    const double x4 = walk[base - sh[2]];
    const double x5 = walk[base - sh[3]];
    double* row = &ds.values(t, 0);
    row[0] = x1;
    row[1] = x2;
    row[2] = x3;
    row[3] = x4;
    row[4] = x5;
    row[5] = (x2 + x3) / 2.0;
    row[6] = (x2 + x3 + x4 + x5) / 4.0;
    row[7] = x2 * x3;
  }
  return ds;
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "valid" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

std::size_t SplitBounds::begin(Split s) const noexcept {
  switch (s) {
    case Split::kTrain: return 0;
    case Split::kVal: return train_end;
    case Split::kTest: return val_end;
  }
  return 0;
}

std::size_t SplitBounds::end(Split s) const noexcept {
  switch (s) {
    case Split::kTrain: return train_end;
    case Split::kVal: return val_end;
    case Split::kTest: return total;
  }
  return 0;
}

SplitBounds split_bounds(std::size_t length, const SplitSpec& spec) {
  if (!(spec.train > 0 && spec.val > 0 && spec.test > 0) ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9)
    throw ConfigError("split fractions must be positive and sum to 1");
  SplitBounds b;
  b.total = length;
  b.train_end = static_cast<std::size_t>(std::floor(spec.train * static_cast<double>(length)));
  b.val_end = b.train_end + static_cast<std::size_t>(std::floor(spec.val * static_cast<double>(length)));
  if (b.train_end == 0 || b.val_end <= b.train_end || b.val_end >= length)
    throw DataError("series of length " + std::to_string(length) + " is too short to split");
  return b;
}

Tensor slice_rows(const Tensor& values, std::size_t begin, std::size_t end) {
  if (begin > end || end > values.rows())
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + to_string(values.shape()));
  const std::size_t c = values.cols();
  std::vector<double> v(values.raw() + begin * c, values.raw() + end * c);
  return Tensor({end - begin, c}, std::move(v));
}

WindowSet::WindowSet(Tensor series, std::size_t input_len, std::size_t pred_len, std::size_t stride)
    : series_(std::move(series)), input_len_(input_len), pred_len_(pred_len), stride_(stride) {
  if (stride == 0) throw ConfigError("make_windows: stride must be >= 1");
  if (input_len == 0 || pred_len == 0) throw ConfigError("make_windows: lengths must be positive");
  const std::size_t t = series_.empty() ? 0 : series_.rows();
  if (t < input_len + pred_len)
    throw DataError("make_windows: series of length " + std::to_string(t) +
                    " is shorter than one window of " + std::to_string(input_len + pred_len));
  count_ = (t - input_len - pred_len) / stride + 1;
}

SeriesWindow WindowSet::operator[](std::size_t i) const {
  if (i >= count_) throw std::out_of_range("window index " + std::to_string(i));
  const std::size_t s = i * stride_;
  return {slice_rows(series_, s, s + input_len_),
          slice_rows(series_, s + input_len_, s + input_len_ + pred_len_), s};
}

WindowSet make_windows(const Tensor& series, std::size_t input_len, std::size_t pred_len,
                       std::size_t stride) {
  return WindowSet(series, input_len, pred_len, stride);
}

Standardizer Standardizer::fit(const Tensor& values, const std::vector<std::string>& columns) {
  const std::size_t t = values.rows(), c = values.cols();
  if (t == 0) throw DataError("standardize: no rows to fit");
  Standardizer s;
  s.mean.assign(c, 0.0);
  s.std.assign(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    double mu = 0.0;
    for (std::size_t r = 0; r < t; ++r) mu += values(r, j);
    mu /= static_cast<double>(t);
    double var = 0.0;
    for (std::size_t r = 0; r < t; ++r) var += (values(r, j) - mu) * (values(r, j) - mu);
    const double sd = std::sqrt(var / static_cast<double>(t));
    if (!(sd > 0.0)) {
      const std::string name = j < columns.size() ? columns[j] : "#" + std::to_string(j);
      throw DataError("standardize: column '" + name + "' has zero variance on the training split");
    }
    s.mean[j] = mu;
    s.std[j] = sd;
  }
  return s;
}

Tensor Standardizer::apply(const Tensor& values) const {
  if (values.cols() != mean.size())
    throw ShapeError("standardize: " + to_string(values.shape()) + " vs " +
                     std::to_string(mean.size()) + " fitted columns");
  Tensor out = values;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) = (out(r, j) - mean[j]) / std[j];
  return out;
}

Tensor Standardizer::invert(const Tensor& values) const {
  if (values.cols() != mean.size())
    throw ShapeError("standardize.invert: " + to_string(values.shape()) + " vs " +
                     std::to_string(mean.size()) + " fitted columns");
  Tensor out = values;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) = out(r, j) * std[j] + mean[j];
  return out;
}

const WindowSet& PreparedData::windows(Split s) const noexcept {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return test;
}

PreparedData prepare(const Dataset& dataset, std::size_t input_len, std::size_t pred_len,
                     const SplitSpec& spec, std::size_t stride) {
  PreparedData p;
  p.bounds = split_bounds(dataset.length(), spec);
  p.scaler = Standardizer::fit(slice_rows(dataset.values, 0, p.bounds.train_end), dataset.columns);
  auto part = [&](Split s) {
    Tensor rows = slice_rows(dataset.values, p.bounds.begin(s), p.bounds.end(s));
    try {
      return WindowSet(p.scaler.apply(rows), input_len, pred_len, stride);
    } catch (const DataError& e) {
      throw DataError(std::string(to_string(s)) + " split: " + e.what());
    }
  };
  p.train = part(Split::kTrain);
  p.val = part(Split::kVal);
  p.test = part(Split::kTest);
  return p;
}

}  // namespace arm
