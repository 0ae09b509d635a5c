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
#include <utility>
#include <vector>

#include "arm/rng.hpp"
#include "arm/tensor.hpp"

namespace arm {

/// Channel subset zeroed for one training step.
struct DropMask {
  std::vector<bool> keep;  // one entry per channel
  double rate = 0.0;       // the drawn r_d

  std::size_t channels() const noexcept { return keep.size(); }
  std::size_t dropped() const noexcept;
};

/// Draws r_d ~ U[0, max_rate] and drops floor(r_d * C) channels chosen
/// uniformly at random, always keeping at least one.
DropMask sample_mask(std::size_t channels, Rng& rng, double max_rate = 0.99);

/// Zeroes the dropped columns of a time x channel block.
Tensor apply_mask(const Tensor& block, const DropMask& mask);
/// Masks input and target with the same mask.
std::pair<Tensor, Tensor> apply_mask(const Tensor& input, const Tensor& target,
                                     const DropMask& mask);

/// Total number of masks drawn by sample_mask in this process.
std::uint64_t mask_draw_count() noexcept;

}  // namespace arm
