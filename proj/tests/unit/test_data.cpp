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

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "arm/data.hpp"
#include "arm/errors.hpp"

namespace arm {
namespace {

using ::testing::HasSubstr;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "arm_data_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(Csv, ParsesValuesAndHeader) {
  const Dataset d = parse_csv("a,b\n1,2\n3.5,-4\n5e-1,6\n");
  ASSERT_EQ(d.values.shape(), (Shape{3, 2}));
  EXPECT_EQ(d.columns, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.values, Tensor::from_rows({{1, 2}, {3.5, -4}, {0.5, 6}}));
}

TEST(Csv, DropsTimestampColumn) {
  const Dataset d = parse_csv("date,x,y\n2016-07-01 00:00:00,1,2\n2016-07-01 01:00:00,3,4\n");
  EXPECT_EQ(d.columns, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d.values, Tensor::from_rows({{1, 2}, {3, 4}}));
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  try {
    parse_csv("a,b\n1,2\n3,oops\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(std::string(e.what()), HasSubstr("row 3"));
    EXPECT_THAT(std::string(e.what()), HasSubstr("'b'"));
    EXPECT_THAT(std::string(e.what()), HasSubstr("oops"));
  }
}

TEST(Csv, GapIsALoadError) {
  EXPECT_THROW(parse_csv("a,b\n1,2\n3,\n"), DataError);
  EXPECT_THROW(parse_csv("a,b\n1,2\n3\n"), DataError);
}

TEST(Csv, EmptyInputIsRejected) {
  EXPECT_THROW(parse_csv(""), DataError);
  EXPECT_THROW(parse_csv("a,b\n"), DataError);
  EXPECT_THROW(load_csv(scratch("does_not_exist.csv")), DataError);
}

TEST(Csv, SaveLoadRoundTrip) {
  Dataset d = generate_multi({300, {8, 16, 24, 48}, 3, 2000});
  d.values(0, 0) = 1.0 / 3.0;
  const auto path = scratch("round_trip.csv");
  save_csv(d, path);
  const Dataset back = load_csv(path);
  EXPECT_EQ(back.columns, d.columns);
  EXPECT_LE(max_abs_diff(back.values, d.values), 1e-12);
}

TEST(Csv, LoadsBenchmarkLayoutFixture) {
  const Dataset d = load_csv(std::filesystem::path(ARM_FIXTURE_DIR) / "ett_style.csv");
  EXPECT_EQ(d.length(), 2000u);
  EXPECT_EQ(d.channels(), 7u);
  EXPECT_EQ(d.columns.back(), "OT");
  EXPECT_NO_THROW(prepare(d, 96, 24, SplitSpec{}));
}

TEST(Multi, DefaultIdentitiesHoldExactly) {
  const Dataset d = generate_multi(MultiOptions{});
  ASSERT_EQ(d.values.shape(), (Shape{18000, 8}));
  const Tensor& v = d.values;
  const std::size_t shifts[] = {96, 192, 336, 720};
  for (std::size_t t = 0; t < d.length(); ++t) {
    for (std::size_t k = 0; k < 4; ++k)
      if (t >= shifts[k]) ASSERT_EQ(v(t, k + 1), v(t - shifts[k], 0));
    ASSERT_EQ(v(t, 5), (v(t, 1) + v(t, 2)) / 2.0);
    ASSERT_EQ(v(t, 6), (v(t, 1) + v(t, 2) + v(t, 3) + v(t, 4)) / 4.0);
    ASSERT_EQ(v(t, 7), v(t, 1) * v(t, 2));
  }
  EXPECT_EQ(v(500, 1), v(404, 0));
  EXPECT_EQ(v(500, 5), 0.5 * v(500, 1) + 0.5 * v(500, 2));
}

TEST(Multi, DeskScaleIdentitiesHold) {
  const Dataset d = generate_multi({2000, {8, 16, 24, 48}, 2024, 2000});
  const Tensor& v = d.values;
  const std::size_t shifts[] = {8, 16, 24, 48};
  for (std::size_t t = 0; t < 2000; ++t) {
    for (std::size_t k = 0; k < 4; ++k)
      if (t >= shifts[k]) ASSERT_EQ(v(t, k + 1), v(t - shifts[k], 0));
    ASSERT_EQ(v(t, 5), (v(t, 1) + v(t, 2)) / 2.0);
  }
}

TEST(Multi, LaggedCopiesReachBeforeTheWindow) {
  // the shifted copies are defined for every row, including the first
  const Dataset d = generate_multi({100, {8, 16, 24, 48}, 1, 2000});
  for (std::size_t k = 1; k <= 4; ++k) EXPECT_TRUE(std::isfinite(d.values(0, k)));
  EXPECT_NE(d.values(0, 1), d.values(0, 0));
}

TEST(Multi, SameSeedSameData) {
  const MultiOptions o{500, {8, 16, 24, 48}, 11, 2000};
  EXPECT_EQ(generate_multi(o).values, generate_multi(o).values);
  MultiOptions other = o;
  other.seed = 12;
  EXPECT_NE(generate_multi(o).values, generate_multi(other).values);
}

TEST(Multi, ShiftReachingBurnInIsRejected) {
  EXPECT_THROW(generate_multi({100, {8, 16, 24, 2000}, 1, 2000}), ConfigError);
  EXPECT_THROW(generate_multi({100, {8, 16, 24}, 1, 2000}), ConfigError);
}

TEST(Windows, ExactFitGivesOneWindow) {
  const Tensor s = Tensor::matrix(36, 2);
  EXPECT_EQ(make_windows(s, 24, 12).size(), 1u);
  EXPECT_THROW(make_windows(Tensor::matrix(35, 2), 24, 12), DataError);
}

TEST(Windows, CountMatchesEnumeration) {
  Tensor s = Tensor::matrix(100, 1);
  for (std::size_t t = 0; t < 100; ++t) s[t] = static_cast<double>(t);
  const WindowSet w = make_windows(s, 24, 12, 3);
  std::size_t brute = 0;
  for (std::size_t start = 0; start + 24 + 12 <= 100; start += 3) ++brute;
  EXPECT_EQ(w.size(), brute);
  for (std::size_t i = 0; i < w.size(); ++i) {
    const SeriesWindow win = w[i];
    EXPECT_EQ(win.start, 3 * i);
    EXPECT_EQ(win.input[0], static_cast<double>(win.start));
    // last input row + 1 == first target row
    EXPECT_EQ(win.target[0], win.input[23] + 1.0);
    EXPECT_EQ(win.target[11], static_cast<double>(win.start + 35));
  }
}

TEST(Windows, ZeroStrideIsRejected) { EXPECT_THROW(make_windows(Tensor::matrix(40, 1), 4, 2, 0), ConfigError); }

TEST(Standardize, TrainSplitIsZeroMeanUnitStd) {
  const Dataset d = generate_multi({1000, {8, 16, 24, 48}, 5, 2000});
  const PreparedData p = prepare(d, 24, 8, SplitSpec{});
  const Tensor& train = p.train.series();
  for (std::size_t c = 0; c < train.cols(); ++c) {
    double m = 0.0, v = 0.0;
    for (std::size_t t = 0; t < train.rows(); ++t) m += train(t, c);
    m /= static_cast<double>(train.rows());
    for (std::size_t t = 0; t < train.rows(); ++t) v += (train(t, c) - m) * (train(t, c) - m);
    v /= static_cast<double>(train.rows());
    EXPECT_NEAR(m, 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(v), 1.0, 1e-10);
  }
}

TEST(Standardize, InverseRoundTrip) {
  const Dataset d = generate_multi({400, {8, 16, 24, 48}, 6, 2000});
  const Standardizer s = Standardizer::fit(d.values, d.columns);
  EXPECT_LE(max_abs_diff(s.invert(s.apply(d.values)), d.values), 1e-12);
}

TEST(Standardize, ZeroVarianceColumnIsNamed) {
  Dataset d = parse_csv("a,flat\n1,2\n2,2\n3,2\n");
  try {
    Standardizer::fit(d.values, d.columns);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(std::string(e.what()), HasSubstr("flat"));
  }
}

TEST(Standardize, StatisticsComeFromTrainOnly) {
  // a steadily drifting series: later splits sit above the train mean
  Dataset d;
  d.columns = {"drift"};
  d.values = Tensor::matrix(500, 1);
  for (std::size_t t = 0; t < 500; ++t) d.values[t] = 0.01 * static_cast<double>(t) + std::sin(0.3 * t);
  const PreparedData p = prepare(d, 16, 4, SplitSpec{});
  auto mean_of = [](const Tensor& s) { return s.sum() / static_cast<double>(s.size()); };
  EXPECT_NEAR(mean_of(p.train.series()), 0.0, 1e-10);
  EXPECT_GT(mean_of(p.val.series()), 1.0);
  EXPECT_GT(mean_of(p.test.series()), mean_of(p.val.series()));
}

TEST(Split, ChronologicalAndContiguous) {
  const SplitBounds b = split_bounds(1000, SplitSpec{});
  EXPECT_EQ(b.begin(Split::kTrain), 0u);
  EXPECT_EQ(b.end(Split::kTrain), 700u);
  EXPECT_EQ(b.begin(Split::kVal), 700u);
  EXPECT_EQ(b.end(Split::kVal), 800u);
  EXPECT_EQ(b.begin(Split::kTest), 800u);
  EXPECT_EQ(b.end(Split::kTest), 1000u);
  EXPECT_THROW(split_bounds(1000, SplitSpec{0.5, 0.1, 0.1}), ConfigError);
  EXPECT_EQ(parse_split("val"), Split::kVal);
  EXPECT_THROW(parse_split("holdout"), ConfigError);
}

TEST(Split, TooShortSplitNamesTheSplit) {
  const Dataset d = generate_multi({200, {8, 16, 24, 48}, 1, 2000});
  try {
    prepare(d, 24, 8, SplitSpec{});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_THAT(std::string(e.what()), HasSubstr("val split"));
  }
}

}  // namespace
}  // namespace arm
