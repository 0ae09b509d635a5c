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

#include "arm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "arm/errors.hpp"
#include "arm/ops.hpp"
#include "arm/rng.hpp"

namespace arm {
namespace {

// Reduces a non-scalar output to a scalar with a fixed projection so that
// every Jacobian row contributes to the checked gradient.
Var contract(Graph& g, Var out) {
  if (out.value().size() == 1) return out;
  Rng rng(0x5eedULL);
  Tensor proj(out.value().shape());
  for (double& v : proj.values()) v = rng.uniform(-1.0, 1.0);
  return ops::sum(ops::mul(out, g.constant(std::move(proj))));
}

struct Evaluation {
  double value;
  std::vector<std::int64_t> decisions;
};

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

void finalize(GradCheckReport& r, const GradCheckOptions& o) {
  if (r.max_rel_error > o.tolerance) {
    r.status = GradCheckStatus::kFail;
  } else if (r.skipped > 0) {
    r.status = GradCheckStatus::kSkippedNonSmooth;
  } else {
    r.status = GradCheckStatus::kPass;
  }
}

void score(GradCheckReport& r, double analytic, double numeric, const GradCheckOptions& o,
           const std::string& leaf, std::size_t index) {
  const double e = relative_error(analytic, numeric, o.abs_floor);
  ++r.checked;
  if (e > r.max_rel_error) {
    r.max_rel_error = e;
    r.worst = leaf + "[" + std::to_string(index) + "]";
  }
}

}  // namespace

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os << name << ": ";
  switch (status) {
    case GradCheckStatus::kPass: os << "pass"; break;
    case GradCheckStatus::kFail: os << "FAIL"; break;
    case GradCheckStatus::kSkippedNonSmooth: os << "skipped: non-smooth point"; break;
  }
  os << " (max rel err " << max_rel_error;
  if (!worst.empty()) os << " at " << worst;
  os << ", " << checked << " checked";
  if (skipped) os << ", " << skipped << " skipped";
  os << ')';
  return os.str();
}

GradCheckReport check_gradients(std::string name, const LeafProgram& program,
                                std::vector<Tensor> point, const GradCheckOptions& options) {
  GradCheckReport report;
  report.name = std::move(name);

  auto evaluate = [&](const std::vector<Tensor>& at) {
    Graph g;
    std::vector<Var> leaves;
    for (const auto& t : at) leaves.push_back(g.leaf(t));
    Var out = contract(g, program(g, leaves));
    return Evaluation{out.value()[0], g.decisions()};
  };

  Graph g;
  std::vector<Var> leaves;
  for (const auto& t : point) leaves.push_back(g.leaf(t));
  Var out = contract(g, program(g, leaves));
  g.backward(out);
  const auto base_decisions = g.decisions();

  for (std::size_t li = 0; li < point.size(); ++li) {
    const Tensor analytic = g.has_grad(leaves[li]) ? g.grad(leaves[li]) : Tensor(point[li].shape());
    for (std::size_t k = 0; k < point[li].size(); ++k) {
      const double x0 = point[li][k];
      point[li][k] = x0 + options.step;
      const Evaluation plus = evaluate(point);
      point[li][k] = x0 - options.step;
      const Evaluation minus = evaluate(point);
      point[li][k] = x0;
      if (plus.decisions != base_decisions || minus.decisions != base_decisions) {
        ++report.skipped;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * options.step);
      score(report, analytic[k], numeric, options, "input" + std::to_string(li), k);
    }
  }
  finalize(report, options);
  return report;
}

GradCheckReport check_parameter_gradients(std::string name, ParameterStore& params,
                                          const ParamProgram& program,
                                          const std::vector<std::string>& prefixes,
                                          const GradCheckOptions& options) {
  GradCheckReport report;
  report.name = std::move(name);

  auto selected = [&](const std::string& pname) {
    if (prefixes.empty()) return true;
    return std::any_of(prefixes.begin(), prefixes.end(),
                       [&](const std::string& p) { return pname.rfind(p, 0) == 0; });
  };

  auto evaluate = [&]() {
    Graph g(&params);
    Var out = contract(g, program(g));
    return Evaluation{out.value()[0], g.decisions()};
  };

  Gradients analytic(params);
  std::vector<std::int64_t> base_decisions;
  {
    Graph g(&params);
    Var out = contract(g, program(g));
    g.backward(out);
    g.collect(analytic);
    base_decisions = g.decisions();
  }

  bool any = false;
  for (ParamId id = 0; id < params.size(); ++id) {
    if (!selected(params.name(id))) continue;
    any = true;
    Tensor& value = params.value(id);
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double x0 = value[k];
      value[k] = x0 + options.step;
      const Evaluation plus = evaluate();
      value[k] = x0 - options.step;
      const Evaluation minus = evaluate();
      value[k] = x0;
      if (plus.decisions != base_decisions || minus.decisions != base_decisions) {
        ++report.skipped;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * options.step);
      score(report, analytic[id][k], numeric, options, params.name(id), k);
    }
  }
  if (!any) throw ConfigError("gradient check '" + report.name + "' selected no parameters");
  finalize(report, options);
  return report;
}

namespace {

struct OpCase {
  std::vector<Shape> shapes;
  LeafProgram program;
  // Some operands must stay in a valid domain (positive, in (0,1), ...).
  std::function<void(std::vector<Tensor>&)> adjust;
};

const std::map<std::string, OpCase, std::less<>>& op_cases() {
  using namespace ops;
  static const std::map<std::string, OpCase, std::less<>> cases = {
      {"add", {{{3, 4}, {3, 4}}, [](Graph&, const std::vector<Var>& v) { return v[0] + v[1]; }, {}}},
      {"mul", {{{3, 4}, {3, 4}}, [](Graph&, const std::vector<Var>& v) { return v[0] * v[1]; }, {}}},
      {"div",
       {{{3, 4}, {3, 4}},
        [](Graph&, const std::vector<Var>& v) { return v[0] / v[1]; },
        [](std::vector<Tensor>& p) {
          for (double& x : p[1].values()) x = 1.0 + std::abs(x);
        }}},
      {"exp", {{{3, 4}}, [](Graph&, const std::vector<Var>& v) { return exp(v[0]); }, {}}},
      {"log",
       {{{3, 4}},
        [](Graph&, const std::vector<Var>& v) { return log(v[0]); },
        [](std::vector<Tensor>& p) {
          for (double& x : p[0].values()) x = 0.5 + std::abs(x);
        }}},
      {"sqrt",
       {{{3, 4}},
        [](Graph&, const std::vector<Var>& v) { return sqrt(v[0]); },
        [](std::vector<Tensor>& p) {
          for (double& x : p[0].values()) x = 0.5 + std::abs(x);
        }}},
      {"gelu", {{{3, 4}}, [](Graph&, const std::vector<Var>& v) { return gelu(v[0]); }, {}}},
      {"clamp",
       {{{3, 4}}, [](Graph&, const std::vector<Var>& v) { return clamp(v[0], -0.5, 0.5); }, {}}},
      {"matmul",
       {{{3, 4}, {4, 2}}, [](Graph&, const std::vector<Var>& v) { return matmul(v[0], v[1]); }, {}}},
      {"transpose",
       {{{3, 4}}, [](Graph&, const std::vector<Var>& v) { return transpose(v[0]); }, {}}},
      {"concat_rows",
       {{{2, 3}, {4, 3}},
        [](Graph&, const std::vector<Var>& v) { return concat_rows({v[0], v[1]}); },
        {}}},
      {"concat_cols",
       {{{3, 2}, {3, 4}},
        [](Graph&, const std::vector<Var>& v) { return concat_cols({v[0], v[1]}); },
        {}}},
      {"slice_rows",
       {{{5, 3}}, [](Graph&, const std::vector<Var>& v) { return slice_rows(v[0], 1, 4); }, {}}},
      {"slice_cols",
       {{{3, 5}}, [](Graph&, const std::vector<Var>& v) { return slice_cols(v[0], 2, 5); }, {}}},
      {"gather_scatter",
       {{{4, 3}},
        [](Graph&, const std::vector<Var>& v) {
          return scatter_rows(gather_rows(v[0], {2, 0, 2}), {1, 3, 0}, 5);
        },
        {}}},
      {"broadcast",
       {{{1, 3}, {4, 1}},
        [](Graph&, const std::vector<Var>& v) {
          return broadcast_rows(v[0], 4) * broadcast_cols(v[1], 3);
        },
        {}}},
      {"reductions",
       {{{4, 3}},
        [](Graph&, const std::vector<Var>& v) {
          return concat_cols({transpose(sum_rows(v[0])), sum_cols(slice_rows(v[0], 0, 3))});
        },
        {}}},
      {"softmax", {{{1, 8}}, [](Graph&, const std::vector<Var>& v) { return softmax_rows(v[0]); }, {}}},
      {"layer_norm",
       {{{4, 3}, {1, 3}, {1, 3}},
        [](Graph&, const std::vector<Var>& v) { return layer_norm_rows(v[0], v[1], v[2]); },
        {}}},
      {"conv1d",
       {{{5, 2}, {2, 3}, {1, 2}},
        [](Graph&, const std::vector<Var>& v) { return depthwise_conv1d(v[0], v[1], v[2]); },
        {}}},
      {"conv1d_cropped",
       {{{4, 2}, {2, 7}, {1, 2}},
        [](Graph&, const std::vector<Var>& v) { return depthwise_conv1d(v[0], v[1], v[2]); },
        {}}},
      {"ema_mean",
       {{{6, 3}, {1, 3}},
        [](Graph&, const std::vector<Var>& v) { return ema_mean(v[0], v[1]); },
        [](std::vector<Tensor>& p) {
          for (double& a : p[1].values()) a = 0.2 + 0.6 * std::abs(std::sin(a));
        }}},
      {"window_std",
       {{{6, 3}}, [](Graph&, const std::vector<Var>& v) { return window_std(v[0], 4); }, {}}},
      {"dropout",
       {{{4, 4}},
        [](Graph&, const std::vector<Var>& v) {
          Rng rng(7);
          return dropout(v[0], 0.3, rng);
        },
        {}}},
      {"mse",
       {{{3, 4}, {3, 4}}, [](Graph&, const std::vector<Var>& v) { return mse(v[0], v[1]); }, {}}},
      {"embedding_add",
       {{{4, 3}, {6, 3}, {1, 3}},
        [](Graph&, const std::vector<Var>& v) {
          return v[0] + slice_rows(v[1], 2, 6) + broadcast_rows(v[2], 4);
        },
        {}}},
  };
  return cases;
}

}  // namespace

std::vector<std::string> checkable_ops() {
  std::vector<std::string> names;
  for (const auto& [k, _] : op_cases()) names.push_back(k);
  return names;
}

GradCheckReport check_op(std::string_view op, std::vector<Tensor> point,
                         const GradCheckOptions& options) {
  auto it = op_cases().find(op);
  if (it == op_cases().end()) throw ConfigError("unknown op for gradient check: " + std::string(op));
  if (point.size() != it->second.shapes.size())
    throw ShapeError("check_op " + std::string(op) + ": expected " +
                     std::to_string(it->second.shapes.size()) + " operands");
  return check_gradients(std::string(op), it->second.program, std::move(point), options);
}

GradCheckReport check_op(std::string_view op, std::uint64_t seed, const GradCheckOptions& options) {
  auto it = op_cases().find(op);
  if (it == op_cases().end()) throw ConfigError("unknown op for gradient check: " + std::string(op));
  Rng rng(seed);
  std::vector<Tensor> point;
  for (const Shape& s : it->second.shapes) {
    Tensor t(s);
    for (double& v : t.values()) v = rng.normal();
    point.push_back(std::move(t));
  }
  if (it->second.adjust) it->second.adjust(point);
  return check_gradients(std::string(op), it->second.program, std::move(point), options);
}

}  // namespace arm
