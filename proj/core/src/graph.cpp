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

#include "arm/graph.hpp"

#include "arm/errors.hpp"

namespace arm {

ParamId ParameterStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  const ParamId id = values_.size();
  index_.emplace(name, id);
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return id;
}

std::optional<ParamId> ParameterStore::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ParamId ParameterStore::at(std::string_view name) const {
  auto id = find(name);
  if (!id) throw ConfigError("unknown parameter: " + std::string(name));
  return *id;
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Gradients::Gradients(const ParameterStore& params) {
  grads_.reserve(params.size());
  for (ParamId i = 0; i < params.size(); ++i) grads_.emplace_back(params.value(i).shape(), 0.0);
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

void Gradients::add(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) throw ShapeError("gradients: store size mismatch");
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

void Gradients::scale(double factor) {
  for (auto& g : grads_) {
    for (double& v : g.values()) v *= factor;
  }
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.values()) s += v * v;
  }
  return s;
}

const Tensor& Var::value() const { return graph->value(*this); }

const Tensor& BackwardContext::grad_output() const { return graph_.nodes_[self_].grad; }
const Tensor& BackwardContext::output() const { return graph_.nodes_[self_].value(); }

const Tensor& BackwardContext::input(std::size_t i) const {
  return graph_.nodes_[graph_.nodes_[self_].inputs[i]].value();
}

bool BackwardContext::needs(std::size_t i) const {
  return graph_.nodes_[graph_.nodes_[self_].inputs[i]].requires_grad;
}

Tensor& BackwardContext::grad_input(std::size_t i) {
  return graph_.grad_buffer(graph_.nodes_[self_].inputs[i]);
}

Var Graph::constant(Tensor value) {
  Node n;
  n.op = "constant";
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Var Graph::leaf(Tensor value) {
  Node n;
  n.op = "leaf";
  n.owned = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

Var Graph::param(ParamId id) {
  if (!params_) throw GraphError("graph has no parameter store bound");
  if (auto it = param_nodes_.find(id); it != param_nodes_.end()) return Var{this, it->second};
  Node n;
  n.op = "param";
  n.external = &params_->value(id);
  n.requires_grad = true;
  n.param = id;
  nodes_.push_back(std::move(n));
  const auto nid = static_cast<NodeId>(nodes_.size() - 1);
  param_nodes_.emplace(id, nid);
  return Var{this, nid};
}

Var Graph::param(std::string_view name) {
  if (!params_) throw GraphError("graph has no parameter store bound");
  return param(params_->at(name));
}

Graph::Node& Graph::node(Var v) {
  if (v.graph != this || v.id >= nodes_.size()) throw GraphError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Graph::Node& Graph::node(Var v) const {
  if (v.graph != this || v.id >= nodes_.size()) throw GraphError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const { return node(v).value(); }

const Tensor& Graph::grad(Var v) const {
  const Node& n = node(v);
  if (!n.has_grad) throw GraphError(std::string("no gradient recorded for node '") + n.op + "'");
  return n.grad;
}

bool Graph::has_grad(Var v) const { return node(v).has_grad; }
bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }
std::string_view Graph::op_name(Var v) const { return node(v).op; }

Tensor& Graph::grad_buffer(NodeId id) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = Tensor(n.value().shape(), 0.0);
    n.has_grad = true;
  }
  return n.grad;
}

Var Graph::record(const char* op, Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite output in op '") + op + "' (node " +
                       std::to_string(nodes_.size()) + ")");
  }
  Node n;
  n.op = op;
  n.owned = std::move(value);
  n.inputs.reserve(inputs.size());
  for (const Var& in : inputs) {
    const Node& src = node(in);
    n.requires_grad = n.requires_grad || src.requires_grad;
    n.inputs.push_back(in.id);
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<NodeId>(nodes_.size() - 1)};
}

void Graph::backward(Var output, const Tensor& seed) {
  if (nodes_.empty()) throw GraphError("backward called before any forward pass was recorded");
  Node& out = node(output);
  if (seed.shape() != out.value().shape()) {
    throw ShapeError("backward: seed " + to_string(seed.shape()) + " vs output " +
                     to_string(out.value().shape()));
  }
  if (!out.requires_grad) return;
  Tensor& g = grad_buffer(output.id);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];

  for (NodeId id = output.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.requires_grad || !n.backward) continue;
    BackwardContext ctx(*this, id);
    n.backward(ctx);
  }
}

void Graph::backward(Var output) {
  backward(output, Tensor(node(output).value().shape(), 1.0));
}

void Graph::zero_grad() {
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
}

void Graph::collect(Gradients& into) const {
  for (const auto& [pid, nid] : param_nodes_) {
    const Node& n = nodes_[nid];
    if (!n.has_grad) continue;
    auto dst = into[pid].values();
    auto src = n.grad.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
}

}  // namespace arm
