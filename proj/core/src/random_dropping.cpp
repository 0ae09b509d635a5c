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

#include "arm/random_dropping.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "arm/errors.hpp"

namespace arm {
namespace {

std::atomic<std::uint64_t> g_draws{0};

}  // namespace

std::size_t DropMask::dropped() const noexcept {
  return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), false));
}

DropMask sample_mask(std::size_t channels, Rng& rng, double max_rate) {
  if (channels == 0) throw ConfigError("sample_mask: channel count must be positive");
  if (!(max_rate >= 0.0 && max_rate < 1.0))
    throw ConfigError("sample_mask: max rate must lie in [0, 1)");
  g_draws.fetch_add(1, std::memory_order_relaxed);

  DropMask mask;
  mask.rate = rng.uniform(0.0, max_rate);
  mask.keep.assign(channels, true);
  auto count = static_cast<std::size_t>(std::floor(mask.rate * static_cast<double>(channels)));
  count = std::min(count, channels - 1);

  std::vector<std::size_t> order(channels);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // partial Fisher-Yates: the first `count` positions form a uniform subset
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, channels - 1);
    std::swap(order[i], order[pick(rng.engine())]);
    mask.keep[order[i]] = false;
  }
  return mask;
}

Tensor apply_mask(const Tensor& block, const DropMask& mask) {
  if (block.cols() != mask.channels())
    throw ShapeError("apply_mask: block " + to_string(block.shape()) + " vs mask of " +
                     std::to_string(mask.channels()) + " channels");
  Tensor out = block;
  for (std::size_t c = 0; c < mask.channels(); ++c) {
    if (mask.keep[c]) continue;
    for (std::size_t r = 0; r < out.rows(); ++r) out(r, c) = 0.0;
  }
  return out;
}

std::pair<Tensor, Tensor> apply_mask(const Tensor& input, const Tensor& target,
                                     const DropMask& mask) {
  return {apply_mask(input, mask), apply_mask(target, mask)};
}

std::uint64_t mask_draw_count() noexcept { return g_draws.load(std::memory_order_relaxed); }

}  // namespace arm
