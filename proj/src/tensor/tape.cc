// rdu/src/tensor/tape.cc

// Copyright 2026  The rdu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "rdu/tensor/tape.h"

#include <algorithm>

#include "rdu/util/error.h"

namespace rdu::tensor {

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (index_.count(name)) throw Error("ParameterStore: duplicate parameter '" + name + "'");
  index_.emplace(name, params_.size());
  params_.push_back(Parameter{std::move(name), std::move(init), true});
  return params_.back();
}

Parameter& ParameterStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("ParameterStore: no parameter '" + std::string(name) + "'");
  return params_[it->second];
}

const Parameter& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("ParameterStore: no parameter '" + std::string(name) + "'");
  return params_[it->second];
}

const Parameter* ParameterStore::find(std::string_view name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

std::size_t ParameterStore::num_scalars() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterStore::set_trainable(const std::function<bool(const std::string&)>& pred) {
  for (auto& p : params_) p.trainable = pred(p.name);
}

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), Tensor(), false, nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::register_store(ParameterStore& store) {
  if (std::find(stores_.begin(), stores_.end(), &store) == stores_.end()) {
    stores_.push_back(&store);
  }
}

Var Tape::parameter(ParameterStore& store, const std::string& name) {
  register_store(store);
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return Var(this, it->second);
  const Parameter& p = store.get(name);
  nodes_.push_back(Node{p.value, Tensor(), record_ && p.trainable, nullptr});
  param_nodes_.emplace(name, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, const std::vector<Var>& parents, BackwardFn fn) {
  bool needs = false;
  if (record_) {
    for (const Var& p : parents) {
      if (&p.tape() != this) throw Error("Tape::record: operand from a different tape");
      needs = needs || nodes_[p.id()].requires_grad;
    }
  }
  nodes_.push_back(Node{std::move(value), Tensor(), needs, needs ? std::move(fn) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.shape() != n.value.shape() || n.grad.size() != n.value.size()) {
    n.grad = Tensor(n.value.shape(), 0.0);
  }
  return n.grad;
}

GradientMap Tape::backward(const Var& loss) {
  if (consumed_) throw Error("backward: tape already consumed by an earlier backward call");
  if (&loss.tape() != this) throw Error("backward: loss was recorded on a different tape");
  if (loss.value().size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_string(loss.value().shape()));
  }
  consumed_ = true;
  if (nodes_[loss.id()].requires_grad) {
    grad(loss.id()).fill(1.0);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
      n.backward(*this, n.grad);
    }
  }
  GradientMap grads;
  for (ParameterStore* store : stores_) {
    for (const Parameter& p : store->params()) {
      if (!p.trainable) continue;
      auto it = param_nodes_.find(p.name);
      if (it != param_nodes_.end() && !nodes_[it->second].grad.empty()) {
        grads[p.name] = nodes_[it->second].grad;
      } else {
        grads[p.name] = Tensor(p.value.shape(), 0.0);
      }
    }
  }
  return grads;
}

}  // namespace rdu::tensor
