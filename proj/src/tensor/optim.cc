// rdu/src/tensor/optim.cc

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

#include "rdu/tensor/optim.h"

#include <cmath>

#include "rdu/util/error.h"

namespace rdu::tensor {

void adam_step(ParameterStore& params, const GradientMap& grads, AdamState& state,
               double lr, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    const Parameter& p = params.get(name);
    if (p.value.shape() != g.shape()) {
      throw ShapeError("adam_step: gradient for '" + name + "' has shape " +
                       shape_string(g.shape()) + ", parameter has " +
                       shape_string(p.value.shape()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (const auto& [name, g] : grads) {
    Parameter& p = params.get(name);
    auto& mom = state.moments[name];
    if (mom.m.size() != g.size()) {
      mom.m = Tensor(g.shape(), 0.0);
      mom.v = Tensor(g.shape(), 0.0);
    }
    double* w = p.value.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      mom.m[i] = config.beta1 * mom.m[i] + (1.0 - config.beta1) * g[i];
      mom.v[i] = config.beta2 * mom.v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = mom.m[i] / c1;
      const double vhat = mom.v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

double clip_grad_norm(GradientMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.values()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& [name, g] : grads)
      for (double& v : g.values()) v *= s;
  }
  return norm;
}

double lr_at_step(const ScheduleConfig& schedule, long long step) {
  if (step < 1) step = 1;
  const long long warmup = std::max<long long>(1, schedule.warmup_steps);
  if (step <= warmup) {
    return schedule.peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  return schedule.peak_lr * std::pow(schedule.decay, static_cast<double>(step - warmup));
}

}  // namespace rdu::tensor
