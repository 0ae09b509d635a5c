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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "arm/errors.hpp"
#include "arm/random_dropping.hpp"
#include "arm/rng.hpp"

namespace arm {
namespace {

// E[floor(C r)] / C for r ~ U[0, max_rate], by integrating the step function.
double expected_drop_fraction(std::size_t c, double max_rate) {
  double total = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    const double lo = static_cast<double>(k) / static_cast<double>(c);
    const double hi = std::min(static_cast<double>(k + 1) / static_cast<double>(c), max_rate);
    if (hi > lo) total += static_cast<double>(k) * (hi - lo);
  }
  return total / max_rate / static_cast<double>(c);
}

TEST(SampleMask, DroppedCountIsFloorOfRateTimesChannels) {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const DropMask m = sample_mask(8, rng);
    ASSERT_EQ(m.channels(), 8u);
    EXPECT_GE(m.rate, 0.0);
    EXPECT_LE(m.rate, 0.99);
    EXPECT_EQ(m.dropped(), static_cast<std::size_t>(std::floor(m.rate * 8.0)));
  }
}

TEST(SampleMask, ZeroMaximumKeepsEverything) {
  Rng rng(1);
  const DropMask m = sample_mask(5, rng, 0.0);
  EXPECT_EQ(m.dropped(), 0u);
  EXPECT_EQ(m.rate, 0.0);
}

TEST(SampleMask, SingleChannelIsAlwaysKept) {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) EXPECT_TRUE(sample_mask(1, rng).keep[0]);
}

TEST(SampleMask, AtLeastOneChannelSurvives) {
  Rng rng(2);
  for (std::size_t c : {2, 3, 50}) {
    for (int i = 0; i < 500; ++i) EXPECT_LT(sample_mask(c, rng, 0.99).dropped(), c);
  }
}

TEST(SampleMask, MeanDroppedFractionMatchesAnalyticExpectation) {
  Rng rng(2024);
  const int draws = 10000;
  double dropped = 0.0;
  for (int i = 0; i < draws; ++i) dropped += static_cast<double>(sample_mask(8, rng).dropped()) / 8.0;
  const double expected = expected_drop_fraction(8, 0.99);
  EXPECT_NEAR(dropped / draws, expected, 0.02 * expected);
}

TEST(SampleMask, DroppedChannelsAreUniform) {
  Rng rng(11);
  std::vector<double> hits(6, 0.0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const DropMask m = sample_mask(6, rng);
    for (std::size_t c = 0; c < 6; ++c) hits[c] += m.keep[c] ? 0.0 : 1.0;
  }
  const double mean = expected_drop_fraction(6, 0.99) * draws;
  for (double h : hits) EXPECT_NEAR(h, mean, 0.05 * mean);
}

TEST(SampleMask, FixedSeedGivesIdenticalSequence) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) {
    const DropMask x = sample_mask(7, a), y = sample_mask(7, b);
    EXPECT_EQ(x.keep, y.keep);
    EXPECT_EQ(x.rate, y.rate);
  }
}

TEST(SampleMask, DrawsAreCounted) {
  Rng rng(1);
  const auto before = mask_draw_count();
  for (int i = 0; i < 3; ++i) sample_mask(4, rng);
  EXPECT_EQ(mask_draw_count() - before, 3u);
}

TEST(ApplyMask, DropsColumnZero) {
  DropMask m{{false, true}, 0.5};
  EXPECT_EQ(apply_mask(Tensor::from_rows({{1, 2}, {3, 4}}), m), Tensor::from_rows({{0, 2}, {0, 4}}));
}

TEST(ApplyMask, AllKeepIsIdentityOnBothBlocks) {
  DropMask m{{true, true, true}, 0.0};
  const Tensor x = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
  const Tensor y = Tensor::from_rows({{7, 8, 9}});
  auto [mx, my] = apply_mask(x, y, m);
  EXPECT_EQ(mx, x);
  EXPECT_EQ(my, y);
}

TEST(ApplyMask, InputAndTargetShareTheMask) {
  Rng rng(5);
  Tensor x = Tensor::matrix(6, 8), y = Tensor::matrix(3, 8);
  for (double& v : x.values()) v = rng.normal() + 5.0;
  for (double& v : y.values()) v = rng.normal() + 5.0;
  for (int i = 0; i < 50; ++i) {
    const DropMask m = sample_mask(8, rng);
    auto [mx, my] = apply_mask(x, y, m);
    for (std::size_t c = 0; c < 8; ++c) {
      for (std::size_t t = 0; t < 6; ++t) EXPECT_EQ(mx(t, c), m.keep[c] ? x(t, c) : 0.0);
      for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(my(t, c), m.keep[c] ? y(t, c) : 0.0);
    }
  }
}

TEST(ApplyMask, ChannelMismatchIsRejected) {
  DropMask m{{true, false}, 0.5};
  EXPECT_THROW(apply_mask(Tensor::matrix(2, 3), m), ShapeError);
  EXPECT_THROW(apply_mask(Tensor::matrix(2, 2), Tensor::matrix(2, 3), m), ShapeError);
}

}  // namespace
}  // namespace arm
