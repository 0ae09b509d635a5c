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

#include "arm/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "arm/errors.hpp"

namespace arm::ops {
namespace {

[[noreturn]] void shape_fail(const char* op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a) + " and " +
                   to_string(b));
}

[[noreturn]] void shape_fail(const char* op, const Shape& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": shape " + to_string(a) + " " + why);
}

Graph& graph_of(Var a) {
  if (!a.valid()) throw GraphError("operation on an unbound variable");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph) throw GraphError("operands belong to different graphs");
  return graph_of(a);
}

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2) shape_fail(op, t.shape(), "is not rank 2");
}

void require_same(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_fail(op, a.shape(), b.shape());
}

// C[m x n] += A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m x n] += A[m x k] * B[n x k]^T
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      crow[j] += s;
    }
  }
}

// C[m x n] += A[k x m]^T * B[k x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename Fwd, typename Deriv>
Var unary(const char* op, Var a, Fwd fwd, Deriv deriv) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fwd(x[i]);
  return g.record(op, std::move(y), {a}, [deriv](BackwardContext& ctx) {
    const Tensor& x = ctx.input(0);
    const Tensor& y = ctx.output();
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += go[i] * deriv(x[i], y[i]);
  });
}

std::int64_t hash_codes(const std::vector<std::uint8_t>& codes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto c : codes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<std::int64_t>(h);
}

}  // namespace

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same("add", x, y);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + y[i];
  return g.record("add", std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    for (std::size_t k = 0; k < 2; ++k) {
      if (!ctx.needs(k)) continue;
      Tensor& gi = ctx.grad_input(k);
      for (std::size_t i = 0; i < go.size(); ++i) gi[i] += go[i];
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same("sub", x, y);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
  return g.record("sub", std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad_input(0);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad_input(1);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
    }
  });
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same("mul", x, y);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i];
  return g.record("mul", std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    const Tensor& x = ctx.input(0);
    const Tensor& y = ctx.input(1);
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad_input(0);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * y[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad_input(1);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * x[i];
    }
  });
}

Var div(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_same("div", x, y);
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / y[i];
  return g.record("div", std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    const Tensor& y = ctx.input(1);
    const Tensor& q = ctx.output();
    if (ctx.needs(0)) {
      Tensor& ga = ctx.grad_input(0);
      for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] / y[i];
    }
    if (ctx.needs(1)) {
      Tensor& gb = ctx.grad_input(1);
      for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i] * q[i] / y[i];
    }
  });
}

Var neg(Var a) {
  return unary("neg", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(Var a, double factor) {
  return unary("scale", a, [factor](double x) { return factor * x; },
               [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double value) {
  return unary("add_scalar", a, [value](double x) { return x + value; },
               [](double, double) { return 1.0; });
}

Var exp(Var a) {
  return unary("exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary("log", a, [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var sqrt(Var a) {
  return unary("sqrt", a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return 0.5 / y; });
}

Var square(Var a) {
  return unary("square", a, [](double x) { return x * x; },
               [](double x, double) { return 2.0 * x; });
}

Var gelu(Var a) {
  constexpr double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return unary(
      "gelu", a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
      [](double x, double) {
        return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) + x * inv_sqrt_2pi * std::exp(-0.5 * x * x);
      });
}

Var relu(Var a) {
  std::vector<std::uint8_t> branch;
  branch.reserve(a.value().size());
  for (double v : a.value().values()) branch.push_back(v > 0.0 ? 1 : 0);
  graph_of(a).record_decision(hash_codes(branch));
  return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var clamp(Var a, double lo, double hi) {
  if (lo > hi) throw ConfigError("clamp: lo > hi");
  std::vector<std::uint8_t> branch;
  branch.reserve(a.value().size());
  for (double v : a.value().values()) branch.push_back(v < lo ? 0 : (v > hi ? 2 : 1));
  graph_of(a).record_decision(hash_codes(branch));
  return unary("clamp", a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [lo, hi](double x, double) { return (x < lo || x > hi) ? 0.0 : 1.0; });
}

Var broadcast_rows(Var row, std::size_t n) {
  Graph& g = graph_of(row);
  const Tensor& v = row.value();
  require_rank2("broadcast_rows", v);
  if (v.rows() != 1) shape_fail("broadcast_rows", v.shape(), "is not a row vector");
  const std::size_t c = v.cols();
  Tensor out = Tensor::matrix(n, c);
  for (std::size_t r = 0; r < n; ++r) std::copy(v.raw(), v.raw() + c, out.raw() + r * c);
  return g.record("broadcast_rows", std::move(out), {row}, [n, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gv = ctx.grad_input(0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < c; ++j) gv[j] += go[r * c + j];
  });
}

Var broadcast_cols(Var col, std::size_t n) {
  Graph& g = graph_of(col);
  const Tensor& v = col.value();
  require_rank2("broadcast_cols", v);
  if (v.cols() != 1) shape_fail("broadcast_cols", v.shape(), "is not a column vector");
  const std::size_t r = v.rows();
  Tensor out = Tensor::matrix(r, n);
  for (std::size_t i = 0; i < r; ++i)
    std::fill(out.raw() + i * n, out.raw() + (i + 1) * n, v[i]);
  return g.record("broadcast_cols", std::move(out), {col}, [r, n](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gv = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += go[i * n + j];
      gv[i] += s;
    }
  });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  require_rank2("matmul", x);
  require_rank2("matmul", y);
  if (x.cols() != y.rows()) shape_fail("matmul", x.shape(), y.shape());
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  Tensor out = Tensor::matrix(m, n);
  gemm_nn(x.raw(), y.raw(), out.raw(), m, k, n);
  return g.record("matmul", std::move(out), {a, b}, [m, k, n](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    if (ctx.needs(0)) gemm_nt(go.raw(), ctx.input(1).raw(), ctx.grad_input(0).raw(), m, n, k);
    if (ctx.needs(1)) gemm_tn(ctx.input(0).raw(), go.raw(), ctx.grad_input(1).raw(), k, m, n);
  });
}

Var transpose(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("transpose", x);
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::matrix(c, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  return g.record("transpose", std::move(out), {a}, [r, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += go[j * r + i];
  });
}

Var linear(Var x, Var weight, Var bias) {
  Var y = matmul(x, weight);
  return add(y, broadcast_rows(bias, y.rows()));
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Graph& g = graph_of(parts.front());
  const std::size_t c = parts.front().value().cols();
  std::size_t total = 0;
  std::vector<std::size_t> offsets;
  for (const Var& p : parts) {
    graph_of(parts.front(), p);
    const Tensor& t = p.value();
    require_rank2("concat_rows", t);
    if (t.cols() != c) shape_fail("concat_rows", parts.front().value().shape(), t.shape());
    offsets.push_back(total);
    total += t.rows();
  }
  Tensor out = Tensor::matrix(total, c);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& t = parts[k].value();
    std::copy(t.raw(), t.raw() + t.size(), out.raw() + offsets[k] * c);
  }
  return g.record("concat_rows", std::move(out), parts, [offsets, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      if (!ctx.needs(k)) continue;
      Tensor& gi = ctx.grad_input(k);
      const double* src = go.raw() + offsets[k] * c;
      for (std::size_t i = 0; i < gi.size(); ++i) gi[i] += src[i];
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Graph& g = graph_of(parts.front());
  const std::size_t r = parts.front().value().rows();
  std::size_t total = 0;
  std::vector<std::size_t> offsets, widths;
  for (const Var& p : parts) {
    graph_of(parts.front(), p);
    const Tensor& t = p.value();
    require_rank2("concat_cols", t);
    if (t.rows() != r) shape_fail("concat_cols", parts.front().value().shape(), t.shape());
    offsets.push_back(total);
    widths.push_back(t.cols());
    total += t.cols();
  }
  Tensor out = Tensor::matrix(r, total);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& t = parts[k].value();
    for (std::size_t i = 0; i < r; ++i)
      std::copy(t.raw() + i * widths[k], t.raw() + (i + 1) * widths[k],
                out.raw() + i * total + offsets[k]);
  }
  return g.record("concat_cols", std::move(out), parts,
                  [offsets, widths, r, total](BackwardContext& ctx) {
                    const Tensor& go = ctx.grad_output();
                    for (std::size_t k = 0; k < offsets.size(); ++k) {
                      if (!ctx.needs(k)) continue;
                      Tensor& gi = ctx.grad_input(k);
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < widths[k]; ++j)
                          gi[i * widths[k] + j] += go[i * total + offsets[k] + j];
                    }
                  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("slice_rows", x);
  if (begin > end || end > x.rows())
    shape_fail("slice_rows", x.shape(),
               "cannot take rows [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  const std::size_t c = x.cols();
  Tensor out({end - begin, c}, std::vector<double>(x.raw() + begin * c, x.raw() + end * c));
  return g.record("slice_rows", std::move(out), {a}, [begin, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    double* dst = gx.raw() + begin * c;
    for (std::size_t i = 0; i < go.size(); ++i) dst[i] += go[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("slice_cols", x);
  if (begin > end || end > x.cols())
    shape_fail("slice_cols", x.shape(),
               "cannot take cols [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  const std::size_t r = x.rows(), c = x.cols(), w = end - begin;
  Tensor out = Tensor::matrix(r, w);
  for (std::size_t i = 0; i < r; ++i)
    std::copy(x.raw() + i * c + begin, x.raw() + i * c + end, out.raw() + i * w);
  return g.record("slice_cols", std::move(out), {a}, [begin, r, c, w](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < w; ++j) gx[i * c + begin + j] += go[i * w + j];
  });
}

Var gather_rows(Var a, std::vector<std::size_t> index) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("gather_rows", x);
  const std::size_t c = x.cols();
  Tensor out = Tensor::matrix(index.size(), c);
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= x.rows()) shape_fail("gather_rows", x.shape(), "row index out of range");
    std::copy(x.raw() + index[k] * c, x.raw() + (index[k] + 1) * c, out.raw() + k * c);
  }
  return g.record("gather_rows", std::move(out), {a},
                  [index = std::move(index), c](BackwardContext& ctx) {
                    const Tensor& go = ctx.grad_output();
                    Tensor& gx = ctx.grad_input(0);
                    for (std::size_t k = 0; k < index.size(); ++k)
                      for (std::size_t j = 0; j < c; ++j) gx[index[k] * c + j] += go[k * c + j];
                  });
}

Var scatter_rows(Var a, std::vector<std::size_t> index, std::size_t n) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("scatter_rows", x);
  if (index.size() != x.rows()) shape_fail("scatter_rows", x.shape(), "row/index count mismatch");
  const std::size_t c = x.cols();
  Tensor out = Tensor::matrix(n, c);
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= n) shape_fail("scatter_rows", x.shape(), "target row out of range");
    for (std::size_t j = 0; j < c; ++j) out[index[k] * c + j] += x[k * c + j];
  }
  return g.record("scatter_rows", std::move(out), {a},
                  [index = std::move(index), c](BackwardContext& ctx) {
                    const Tensor& go = ctx.grad_output();
                    Tensor& gx = ctx.grad_input(0);
                    for (std::size_t k = 0; k < index.size(); ++k)
                      for (std::size_t j = 0; j < c; ++j) gx[k * c + j] += go[index[k] * c + j];
                  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  return g.record("sum", Tensor({1, 1}, {a.value().sum()}), {a}, [](BackwardContext& ctx) {
    const double go = ctx.grad_output()[0];
    Tensor& gx = ctx.grad_input(0);
    for (double& v : gx.values()) v += go;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  Graph& g = graph_of(a);
  return g.record("mean", Tensor({1, 1}, {a.value().sum() / n}), {a}, [n](BackwardContext& ctx) {
    const double go = ctx.grad_output()[0] / n;
    Tensor& gx = ctx.grad_input(0);
    for (double& v : gx.values()) v += go;
  });
}

Var sum_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("sum_rows", x);
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::matrix(1, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j] += x[i * c + j];
  return g.record("sum_rows", std::move(out), {a}, [r, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += go[j];
  });
}

Var sum_cols(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("sum_cols", x);
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::matrix(r, 1);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i] += x[i * c + j];
  return g.record("sum_cols", std::move(out), {a}, [r, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += go[i];
  });
}

Var mse(Var prediction, Var target) {
  Graph& g = graph_of(prediction, target);
  const Tensor& p = prediction.value();
  const Tensor& t = target.value();
  require_same("mse", p, t);
  const double n = static_cast<double>(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - t[i]) * (p[i] - t[i]);
  return g.record("mse", Tensor({1, 1}, {s / n}), {prediction, target},
                  [n](BackwardContext& ctx) {
                    const double go = ctx.grad_output()[0];
                    const Tensor& p = ctx.input(0);
                    const Tensor& t = ctx.input(1);
                    for (std::size_t k = 0; k < 2; ++k) {
                      if (!ctx.needs(k)) continue;
                      const double sign = k == 0 ? 1.0 : -1.0;
                      Tensor& gi = ctx.grad_input(k);
                      for (std::size_t i = 0; i < p.size(); ++i)
                        gi[i] += sign * go * 2.0 * (p[i] - t[i]) / n;
                    }
                  });
}

Var softmax_rows(Var a) {
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  require_rank2("softmax_rows", x);
  const std::size_t r = x.rows(), c = x.cols();
  Tensor out = Tensor::matrix(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = x.raw() + i * c;
    double* o = out.raw() + i * c;
    const double mx = *std::max_element(row, row + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      o[j] = std::exp(row[j] - mx);
      z += o[j];
    }
    for (std::size_t j = 0; j < c; ++j) o[j] /= z;
  }
  return g.record("softmax_rows", std::move(out), {a}, [r, c](BackwardContext& ctx) {
    const Tensor& y = ctx.output();
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += go[i * c + j] * y[i * c + j];
      for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += y[i * c + j] * (go[i * c + j] - dot);
    }
  });
}

Var layer_norm_rows(Var a, Var gamma, Var beta, double eps) {
  Graph& g = graph_of(a, gamma);
  graph_of(a, beta);
  const Tensor& x = a.value();
  require_rank2("layer_norm", x);
  const std::size_t r = x.rows(), c = x.cols();
  const Tensor& gm = gamma.value();
  const Tensor& bt = beta.value();
  if (gm.size() != c) shape_fail("layer_norm", x.shape(), gm.shape());
  if (bt.size() != c) shape_fail("layer_norm", x.shape(), bt.shape());

  Tensor out = Tensor::matrix(r, c);
  // normalised values and inverse std are kept for the backward pass
  auto xhat = std::make_shared<Tensor>(Tensor::matrix(r, c));
  auto inv_std = std::make_shared<std::vector<double>>(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double* row = x.raw() + i * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += row[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (row[j] - mu) * is;
      (*xhat)[i * c + j] = h;
      out[i * c + j] = h * gm[j] + bt[j];
    }
  }
  return g.record("layer_norm", std::move(out), {a, gamma, beta},
                  [xhat, inv_std, r, c](BackwardContext& ctx) {
                    const Tensor& go = ctx.grad_output();
                    const Tensor& gm = ctx.input(1);
                    if (ctx.needs(1) || ctx.needs(2)) {
                      for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < c; ++j) {
                          if (ctx.needs(1)) ctx.grad_input(1)[j] += go[i * c + j] * (*xhat)[i * c + j];
                          if (ctx.needs(2)) ctx.grad_input(2)[j] += go[i * c + j];
                        }
                    }
                    if (!ctx.needs(0)) return;
                    Tensor& gx = ctx.grad_input(0);
                    const double n = static_cast<double>(c);
                    for (std::size_t i = 0; i < r; ++i) {
                      double mg = 0.0, mgx = 0.0;
                      for (std::size_t j = 0; j < c; ++j) {
                        const double gh = go[i * c + j] * gm[j];
                        mg += gh;
                        mgx += gh * (*xhat)[i * c + j];
                      }
                      mg /= n;
                      mgx /= n;
                      for (std::size_t j = 0; j < c; ++j) {
                        const double gh = go[i * c + j] * gm[j];
                        gx[i * c + j] += (*inv_std)[i] * (gh - mg - (*xhat)[i * c + j] * mgx);
                      }
                    }
                  });
}

std::size_t cropped_kernel_size(std::size_t kernel, std::size_t length) {
  if (kernel <= length) return kernel;
  return length % 2 == 1 ? length : length - 1;
}

Var depthwise_conv1d(Var x, Var weight, Var bias) {
  Graph& g = graph_of(x, weight);
  graph_of(x, bias);
  const Tensor& xv = x.value();
  const Tensor& wv = weight.value();
  const Tensor& bv = bias.value();
  require_rank2("depthwise_conv1d", xv);
  require_rank2("depthwise_conv1d", wv);
  const std::size_t l = xv.rows(), c = xv.cols(), s = wv.cols();
  if (wv.rows() != c) shape_fail("depthwise_conv1d", xv.shape(), wv.shape());
  if (bv.size() != c) shape_fail("depthwise_conv1d", xv.shape(), bv.shape());
  if (l == 0 || s == 0) shape_fail("depthwise_conv1d", xv.shape(), "has an empty axis");

  const std::size_t se = cropped_kernel_size(s, l);
  const std::size_t crop = (s - se) / 2;
  const std::ptrdiff_t left = static_cast<std::ptrdiff_t>((se - 1) / 2);
  const auto L = static_cast<std::ptrdiff_t>(l);

  Tensor out = Tensor::matrix(l, c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    const double* w = wv.raw() + ch * s + crop;
    for (std::ptrdiff_t t = 0; t < L; ++t) {
      double acc = bv[ch];
      const std::ptrdiff_t k0 = std::max<std::ptrdiff_t>(0, left - t);
      const std::ptrdiff_t k1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(se), L - t + left);
      for (std::ptrdiff_t k = k0; k < k1; ++k) acc += w[k] * xv[(t + k - left) * c + ch];
      out[t * c + ch] = acc;
    }
  }
  return g.record(
      "depthwise_conv1d", std::move(out), {x, weight, bias},
      [l, c, s, se, crop, left](BackwardContext& ctx) {
        const Tensor& go = ctx.grad_output();
        const Tensor& xv = ctx.input(0);
        const Tensor& wv = ctx.input(1);
        const auto L = static_cast<std::ptrdiff_t>(l);
        const bool need_x = ctx.needs(0), need_w = ctx.needs(1), need_b = ctx.needs(2);
        Tensor* gx = need_x ? &ctx.grad_input(0) : nullptr;
        Tensor* gw = need_w ? &ctx.grad_input(1) : nullptr;
        Tensor* gb = need_b ? &ctx.grad_input(2) : nullptr;
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* w = wv.raw() + ch * s + crop;
          for (std::ptrdiff_t t = 0; t < L; ++t) {
            const double gt = go[t * c + ch];
            if (gb) (*gb)[ch] += gt;
            if (gt == 0.0) continue;
            const std::ptrdiff_t k0 = std::max<std::ptrdiff_t>(0, left - t);
            const std::ptrdiff_t k1 =
                std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(se), L - t + left);
            for (std::ptrdiff_t k = k0; k < k1; ++k) {
              const std::size_t xi = (t + k - left) * c + ch;
              if (gw) (*gw)[ch * s + crop + k] += gt * xv[xi];
              if (gx) (*gx)[xi] += gt * w[k];
            }
          }
        }
      });
}

Var ema_mean(Var x, Var alpha) {
  Graph& g = graph_of(x, alpha);
  const Tensor& xv = x.value();
  const Tensor& av = alpha.value();
  require_rank2("ema_mean", xv);
  const std::size_t l = xv.rows(), c = xv.cols();
  if (av.size() != c) shape_fail("ema_mean", xv.shape(), av.shape());
  if (l == 0) shape_fail("ema_mean", xv.shape(), "has no rows");

  // normalised weights per column, stored l x c for the backward pass
  auto weights = std::make_shared<Tensor>(Tensor::matrix(l, c));
  Tensor out = Tensor::matrix(1, c);
  for (std::size_t j = 0; j < c; ++j) {
    const double a = av[j];
    if (!(a > 0.0 && a < 1.0))
      throw ConfigError("ema_mean: alpha must lie in (0, 1), got " + std::to_string(a));
    double pw = 1.0, z = 0.0;
    for (std::size_t t = l; t-- > 0;) {
      (*weights)(t, j) = pw;
      z += pw;
      pw *= a;
    }
    double e = 0.0;
    for (std::size_t t = 0; t < l; ++t) {
      (*weights)(t, j) /= z;
      e += (*weights)(t, j) * xv(t, j);
    }
    out[j] = e;
  }
  return g.record("ema_mean", std::move(out), {x, alpha}, [weights, l, c](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& av = ctx.input(1);
    const Tensor& e = ctx.output();
    if (ctx.needs(0)) {
      Tensor& gx = ctx.grad_input(0);
      for (std::size_t t = 0; t < l; ++t)
        for (std::size_t j = 0; j < c; ++j) gx(t, j) += go[j] * (*weights)(t, j);
    }
    if (ctx.needs(1)) {
      // dE/dalpha = (1/alpha) * sum_t w_t * (l-1-t) * (x_t - E)
      Tensor& ga = ctx.grad_input(1);
      for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t t = 0; t < l; ++t)
          s += (*weights)(t, j) * static_cast<double>(l - 1 - t) * (xv(t, j) - e[j]);
        ga[j] += go[j] * s / av[j];
      }
    }
  });
}

Var window_std(Var x, std::size_t window) {
  Graph& g = graph_of(x);
  const Tensor& xv = x.value();
  require_rank2("window_std", xv);
  const std::size_t l = xv.rows(), c = xv.cols();
  if (window == 0 || window > l)
    shape_fail("window_std", xv.shape(),
               "cannot supply a trailing window of " + std::to_string(window));
  const std::size_t start = l - window;
  const double n = static_cast<double>(window);
  auto means = std::make_shared<std::vector<double>>(c);
  Tensor out = Tensor::matrix(1, c);
  for (std::size_t j = 0; j < c; ++j) {
    double mu = 0.0;
    for (std::size_t t = start; t < l; ++t) mu += xv(t, j);
    mu /= n;
    double var = 0.0;
    for (std::size_t t = start; t < l; ++t) var += (xv(t, j) - mu) * (xv(t, j) - mu);
    (*means)[j] = mu;
    out[j] = std::sqrt(var / n);
  }
  return g.record("window_std", std::move(out), {x}, [means, start, l, c, n](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    const Tensor& xv = ctx.input(0);
    const Tensor& sd = ctx.output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t j = 0; j < c; ++j) {
      if (sd[j] == 0.0) continue;  // sqrt kink: zero subgradient
      for (std::size_t t = start; t < l; ++t)
        gx(t, j) += go[j] * (xv(t, j) - (*means)[j]) / (n * sd[j]);
    }
  });
}

Var dropout(Var a, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (rate == 0.0) return a;
  Graph& g = graph_of(a);
  const Tensor& x = a.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<std::vector<double>>(x.size());
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    (*mask)[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
    out[i] = x[i] * (*mask)[i];
  }
  return g.record("dropout", std::move(out), {a}, [mask](BackwardContext& ctx) {
    const Tensor& go = ctx.grad_output();
    Tensor& gx = ctx.grad_input(0);
    for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * (*mask)[i];
  });
}

}  // namespace arm::ops
