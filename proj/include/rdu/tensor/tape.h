// rdu/include/rdu/tensor/tape.h

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

#ifndef RDU_TENSOR_TAPE_H_
#define RDU_TENSOR_TAPE_H_

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rdu/tensor/tensor.h"

namespace rdu::tensor {

struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

// Named, insertion-ordered parameter registry. References returned by add()
// and get() stay valid for the lifetime of the store.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  const Parameter* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::deque<Parameter>& params() { return params_; }
  const std::deque<Parameter>& params() const { return params_; }
  std::size_t num_scalars() const;

  // Marks every parameter whose name satisfies pred as trainable, the rest
  // frozen.
  void set_trainable(const std::function<bool(const std::string&)>& pred);

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

using GradientMap = std::map<std::string, Tensor>;

class Tape;

// Handle to a value recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records one forward pass. Each op appends a node holding its value and a
// closure that pushes the node's gradient to its parents. A tape supports a
// single backward() call.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  // With record=false nothing is differentiable and no closures are kept;
  // used for inference and finite differences.
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Tensor value);
  // Leaf bound to a stored parameter; cached per tape. Differentiable when
  // recording and the parameter is trainable. Registers the store so that
  // backward() reports zeros for its untouched trainable parameters.
  Var parameter(ParameterStore& store, const std::string& name);
  void register_store(ParameterStore& store);

  // Appends a node computed from `parents`. The closure is dropped when no
  // parent requires a gradient.
  Var record(Tensor value, const std::vector<Var>& parents, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of node `id`, zero-initialised on first access.
  Tensor& grad(std::size_t id);
  std::size_t size() const { return nodes_.size(); }

  GradientMap backward(const Var& loss);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  bool record_;
  bool consumed_ = false;
  std::deque<Node> nodes_;
  std::map<std::string, std::size_t> param_nodes_;
  std::vector<ParameterStore*> stores_;
};

}  // namespace rdu::tensor

#endif  // RDU_TENSOR_TAPE_H_
