// rdu/include/rdu/tensor/optim.h

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

#ifndef RDU_TENSOR_OPTIM_H_
#define RDU_TENSOR_OPTIM_H_

#include <map>
#include <string>

#include "rdu/tensor/tape.h"

namespace rdu::tensor {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
};

struct AdamState {
  struct Moments {
    Tensor m, v;
  };
  std::map<std::string, Moments> moments;
  long long step = 0;
};

// One bias-corrected Adam update of every parameter named in `grads`.
// Parameters absent from `grads` are left bitwise untouched.
void adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               double lr, const AdamConfig& config = {});

// Rescales grads in place so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(GradientMap& grads, double max_norm);

// Linear warmup to peak_lr, then peak_lr * decay^(step - warmup_steps).
struct ScheduleConfig {
  double peak_lr = 1e-3;
  long long warmup_steps = 200;
  double decay = 0.9995;
};

double lr_at_step(const ScheduleConfig& schedule, long long step);

}  // namespace rdu::tensor

#endif  // RDU_TENSOR_OPTIM_H_
