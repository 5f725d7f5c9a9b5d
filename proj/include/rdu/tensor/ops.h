// rdu/include/rdu/tensor/ops.h

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

#ifndef RDU_TENSOR_OPS_H_
#define RDU_TENSOR_OPS_H_

#include <span>
#include <vector>

#include "rdu/tensor/tape.h"
#include "rdu/util/common.h"

namespace rdu::tensor {

// Every op records onto the tape of its first operand and throws ShapeError
// naming itself on incompatible shapes. Axis-wise ops accept rank 1 (treated
// as a single row) or rank 2.

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
// a[m x n] + bias[n] on every row.
Var add_row(const Var& a, const Var& bias);
// s * a with s a single-element Var.
Var scale_by(const Var& a, const Var& s);

Var softmax(const Var& a, int axis);
Var log_softmax(const Var& a, int axis);
Var tanh(const Var& a);
Var gelu(const Var& a);
Var relu(const Var& a);

// Normalises each row over the last axis; gamma/beta may be invalid Vars.
Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps = 1e-12);

// Rows table[ids[i]] stacked into an ids.size() x d matrix.
Var embedding_lookup(const Var& table, std::span<const int> ids);
// out[i] = a[i, ids[i]].
Var pick(const Var& a, std::span<const int> ids);

Var concat(const std::vector<Var>& parts, int axis);
Var slice(const Var& a, int axis, std::size_t begin, std::size_t end);

Var sum(const Var& a);
Var mean(const Var& a);

// Inverted dropout; identity when !train or p == 0.
Var dropout(const Var& a, double p, bool train, Rng& rng);

// sum_l weights[l] * layers[l]; weights is a length-L vector.
Var weighted_sum(const Var& weights, const std::vector<Var>& layers);

}  // namespace rdu::tensor

#endif  // RDU_TENSOR_OPS_H_
