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

#include "arm/config.hpp"
#include "arm/tensor.hpp"

namespace arm {

/// A multivariate series in original units, T x C.
struct Dataset {
  std::string name;
  Tensor values;
  std::vector<std::string> columns;
  std::string frequency;

  std::size_t length() const noexcept { return values.empty() ? 0 : values.rows(); }
  std::size_t channels() const noexcept { return columns.size(); }
};

/// Comma-separated text with a header row. A leading column named
/// date/timestamp/time, or holding non-numeric cells, is treated as a
/// timestamp and dropped. Errors name the offending row and column.
Dataset parse_csv(std::string_view text, std::string name = "data");
Dataset load_csv(const std::filesystem::path& path);
/// Writes a `date` column of synthetic hourly stamps followed by the values
/// at full double precision.
void save_csv(const Dataset& dataset, const std::filesystem::path& path);

struct MultiOptions {
  std::size_t length = 18000;
  std::vector<std::size_t> shifts{96, 192, 336, 720};
  std::uint64_t seed = 2024;
  std::size_t burn_in = 2000;
};

/// Eight series from one Gaussian random walk: the walk, four lagged
/// copies, the mean of copies 1-2, the mean of copies 1-4, and the product
/// of copies 1 and 2.
Dataset generate_multi(const MultiOptions& options);

enum class Split { kTrain, kVal, kTest };
Split parse_split(std::string_view name);
const char* to_string(Split split) noexcept;

/// Row ranges [0, train_end), [train_end, val_end), [val_end, total).
struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  std::size_t total = 0;

  std::size_t begin(Split s) const noexcept;
  std::size_t end(Split s) const noexcept;
};
SplitBounds split_bounds(std::size_t length, const SplitSpec& spec);

/// Rows [begin, end) of a T x C matrix.
Tensor slice_rows(const Tensor& values, std::size_t begin, std::size_t end);

struct SeriesWindow {
  Tensor input;   // L_I x C
  Tensor target;  // L_P x C
  std::size_t start = 0;
};

/// All sliding windows of one contiguous series, materialised on access.
class WindowSet {
 public:
  WindowSet() = default;
  WindowSet(Tensor series, std::size_t input_len, std::size_t pred_len, std::size_t stride);

  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }
  std::size_t input_len() const noexcept { return input_len_; }
  std::size_t pred_len() const noexcept { return pred_len_; }
  std::size_t channels() const noexcept { return series_.cols(); }
  const Tensor& series() const noexcept { return series_; }

  SeriesWindow operator[](std::size_t i) const;

 private:
  Tensor series_;
  std::size_t input_len_ = 0, pred_len_ = 0, stride_ = 1, count_ = 0;
};

/// floor((T - L_I - L_P) / stride) + 1 windows; DataError when T < L_I + L_P.
WindowSet make_windows(const Tensor& series, std::size_t input_len, std::size_t pred_len,
                       std::size_t stride = 1);

/// Per-column affine standardisation fitted on the training rows.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std;

  /// DataError naming the column when its standard deviation is zero.
  static Standardizer fit(const Tensor& values, const std::vector<std::string>& columns);
  Tensor apply(const Tensor& values) const;
  Tensor invert(const Tensor& values) const;
};

/// Standardised split series plus their windows.
struct PreparedData {
  Standardizer scaler;
  SplitBounds bounds;
  WindowSet train, val, test;

  const WindowSet& windows(Split s) const noexcept;
};

PreparedData prepare(const Dataset& dataset, std::size_t input_len, std::size_t pred_len,
                     const SplitSpec& spec, std::size_t stride = 1);

}  // namespace arm
