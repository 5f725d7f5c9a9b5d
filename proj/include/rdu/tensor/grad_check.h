// rdu/include/rdu/tensor/grad_check.h

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

#ifndef RDU_TENSOR_GRAD_CHECK_H_
#define RDU_TENSOR_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "rdu/tensor/tape.h"

namespace rdu::tensor {

// Builds a scalar loss on the given tape from the parameters it reads via
// tape.parameter(). Must be deterministic (dropout off).
using ScalarFn = std::function<Var(Tape&)>;

struct GradCheckEntry {
  std::string name;
  // ||analytic - numeric||_inf / max(||analytic||_inf, ||numeric||_inf, floor).
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  bool passed = true;
  std::string summary() const;
};

// Compares reverse-mode gradients of every trainable parameter in `params`
// against central differences with step h.
GradCheckReport grad_check(const ScalarFn& f, ParameterStore& params, double h = 1e-5,
                           double tol = 1e-5, double floor = 1e-6);

}  // namespace rdu::tensor

#endif  // RDU_TENSOR_GRAD_CHECK_H_
