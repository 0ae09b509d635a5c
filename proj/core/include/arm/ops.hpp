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
#include <span>
#include <vector>

#include "arm/graph.hpp"
#include "arm/rng.hpp"

// Differentiable primitives. All operate on rank-2 tensors laid out as
// (rows x cols); a "row vector" is 1 x n. Every op validates shapes and
// raises ShapeError naming itself and the offending shapes.
namespace arm::ops {

// elementwise, identical shapes
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var neg(Var a);
Var scale(Var a, double factor);
Var add_scalar(Var a, double value);
Var exp(Var a);
Var log(Var a);
Var sqrt(Var a);
Var square(Var a);
Var gelu(Var a);
Var relu(Var a);
/// Piecewise-linear clamp; branch choices are recorded as a graph decision.
Var clamp(Var a, double lo, double hi);

/// Repeats a 1 x c row vector into n x c.
Var broadcast_rows(Var row, std::size_t n);
/// Repeats an r x 1 column vector into r x n.
Var broadcast_cols(Var col, std::size_t n);

Var matmul(Var a, Var b);
Var transpose(Var a);
/// x W + b with W: in x out and b: 1 x out.
Var linear(Var x, Var weight, Var bias);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
/// Rows of `a` at `index`, in that order.
Var gather_rows(Var a, std::vector<std::size_t> index);
/// Inverse of gather_rows: places row k of `a` at row index[k] of an n-row zero matrix.
Var scatter_rows(Var a, std::vector<std::size_t> index, std::size_t n);

Var sum(Var a);
Var mean(Var a);
/// Column sums, 1 x c.
Var sum_rows(Var a);
/// Row sums, r x 1.
Var sum_cols(Var a);
/// Mean of squared difference over all elements, 1 x 1.
Var mse(Var prediction, Var target);

Var softmax_rows(Var a);
Var layer_norm_rows(Var a, Var gamma, Var beta, double eps = 1e-5);

/// Same-padded depthwise 1D convolution along rows (time). x: l x c,
/// weight: c x s, bias: 1 x c. Kernels longer than l are centre-cropped to
/// the largest odd length that fits.
Var depthwise_conv1d(Var x, Var weight, Var bias);
/// Effective kernel length used for a sequence of length l.
std::size_t cropped_kernel_size(std::size_t kernel, std::size_t length);

/// Per-column exponentially weighted mean of x (l x c) with decay alpha
/// (1 x c, each in (0,1)); the last row carries weight alpha^0.
Var ema_mean(Var x, Var alpha);
/// Per-column population standard deviation of the trailing `window` rows.
Var window_std(Var x, std::size_t window);

/// Inverted dropout; rate 0 returns `a` unchanged.
Var dropout(Var a, double rate, Rng& rng);

}  // namespace arm::ops

namespace arm {

inline Var operator+(Var a, Var b) { return ops::add(a, b); }
inline Var operator-(Var a, Var b) { return ops::sub(a, b); }
inline Var operator*(Var a, Var b) { return ops::mul(a, b); }
inline Var operator/(Var a, Var b) { return ops::div(a, b); }
inline Var operator-(Var a) { return ops::neg(a); }
inline Var operator*(Var a, double s) { return ops::scale(a, s); }
inline Var operator*(double s, Var a) { return ops::scale(a, s); }
inline Var operator+(Var a, double s) { return ops::add_scalar(a, s); }

}  // namespace arm
