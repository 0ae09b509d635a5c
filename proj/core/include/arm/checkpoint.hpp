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

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "arm/tensor.hpp"

namespace arm {

/// Binary layout, all integers and floats little-endian:
///   8 bytes  magic "ARMCKPT\0"
///   u32      format version
///   u64      config text length, then the text (key = value lines)
///   u64      array count, then per array:
///              u32 name length, name bytes, u32 rank, u64 dims[rank],
///              f64 values[product(dims)]
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  std::vector<std::pair<std::string, Tensor>> arrays;

  /// Throws DataError when absent.
  const Tensor& array(const std::string& name) const;
};

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace arm
