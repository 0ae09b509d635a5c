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
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "arm/tensor.hpp"

namespace arm {

using ParamId = std::size_t;
using NodeId = std::uint32_t;

/// Named trainable arrays. Modules register their parameters here at
/// construction; ids are stable for the lifetime of the store.
class ParameterStore {
 public:
  ParamId add(std::string name, Tensor init);

  std::size_t size() const noexcept { return values_.size(); }
  const std::string& name(ParamId id) const { return names_.at(id); }
  const Tensor& value(ParamId id) const { return values_.at(id); }
  Tensor& value(ParamId id) { return values_.at(id); }
  std::optional<ParamId> find(std::string_view name) const;
  /// Throws ConfigError when absent.
  ParamId at(std::string_view name) const;
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::size_t scalar_count() const noexcept;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
  std::unordered_map<std::string, ParamId> index_;
};

/// One gradient buffer per parameter of a store.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& params);

  std::size_t size() const noexcept { return grads_.size(); }
  Tensor& operator[](ParamId id) { return grads_[id]; }
  const Tensor& operator[](ParamId id) const { return grads_[id]; }

  void zero();
  void add(const Gradients& other);
  void scale(double factor);
  double squared_norm() const;

 private:
  std::vector<Tensor> grads_;
};

class Graph;

/// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
struct Var {
  Graph* graph = nullptr;
  NodeId id = std::numeric_limits<NodeId>::max();

  bool valid() const noexcept { return graph != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// View handed to an op's backward closure.
class BackwardContext {
 public:
  BackwardContext(Graph& graph, NodeId self) : graph_(graph), self_(self) {}

  const Tensor& grad_output() const;
  const Tensor& output() const;
  const Tensor& input(std::size_t i) const;
  bool needs(std::size_t i) const;
  /// Gradient buffer of input `i`, zero-initialised on first touch.
  Tensor& grad_input(std::size_t i);

 private:
  Graph& graph_;
  NodeId self_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

/// Define-by-run tape. Ops append nodes in execution order, so node order is
/// a topological order; backward walks it once in reverse and accumulates
/// gradients additively where a value fans out.
class Graph {
 public:
  explicit Graph(const ParameterStore* params = nullptr) : params_(params) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Free leaf that requires a gradient (used by tests and gradient checks).
  Var leaf(Tensor value);
  /// Leaf bound to a stored parameter. Repeated calls return the same node.
  Var param(ParamId id);
  Var param(std::string_view name);
  const ParameterStore* parameters() const noexcept { return params_; }

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  bool has_grad(Var v) const;
  bool requires_grad(Var v) const;
  std::string_view op_name(Var v) const;
  std::size_t node_count() const noexcept { return nodes_.size(); }

  void backward(Var output, const Tensor& seed);
  /// Seeds with ones; intended for scalar losses.
  void backward(Var output);
  void zero_grad();
  /// Adds the gradients of every parameter leaf into `into`.
  void collect(Gradients& into) const;

  /// Discrete choices taken during the forward pass (routing argmax, clamp
  /// branches). Gradient checks compare these between perturbed passes to
  /// detect non-smooth points.
  void record_decision(std::int64_t code) { decisions_.push_back(code); }
  const std::vector<std::int64_t>& decisions() const noexcept { return decisions_; }

  Var record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward);

 private:
  friend class BackwardContext;

  struct Node {
    const char* op = "";
    Tensor owned;
    const Tensor* external = nullptr;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool requires_grad = false;
    bool has_grad = false;
    Tensor grad;
    ParamId param = std::numeric_limits<ParamId>::max();

    const Tensor& value() const { return external ? *external : owned; }
  };

  Node& node(Var v);
  const Node& node(Var v) const;
  Tensor& grad_buffer(NodeId id);

  const ParameterStore* params_;
  std::deque<Node> nodes_;  // deque keeps value references stable while recording
  std::unordered_map<ParamId, NodeId> param_nodes_;
  std::vector<std::int64_t> decisions_;
};

}  // namespace arm
