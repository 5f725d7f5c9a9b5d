// rdu/src/tensor/grad_check.cc

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

#include "rdu/tensor/grad_check.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rdu::tensor {

std::string GradCheckReport::summary() const {
  std::ostringstream ss;
  ss << (passed ? "PASS" : "FAIL") << " max_rel_error=" << max_rel_error;
  for (const auto& e : entries) {
    if (!e.passed) ss << " [" << e.name << " rel=" << e.max_rel_error << "]";
  }
  return ss.str();
}

GradCheckReport grad_check(const ScalarFn& f, ParameterStore& params, double h, double tol,
                           double floor) {
  GradientMap analytic;
  {
    Tape tape;
    tape.register_store(params);
    Var loss = f(tape);
    analytic = tape.backward(loss);
  }
  auto evaluate = [&] {
    Tape tape(false);
    return f(tape).value().item();
  };

  GradCheckReport report;
  for (Parameter& p : params.params()) {
    if (!p.trainable) continue;
    const Tensor& a = analytic.at(p.name);
    Tensor numeric(p.value.shape(), 0.0);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value[i];
      p.value[i] = orig + h;
      const double up = evaluate();
      p.value[i] = orig - h;
      const double down = evaluate();
      p.value[i] = orig;
      numeric[i] = (up - down) / (2.0 * h);
    }
    GradCheckEntry e;
    e.name = p.name;
    double scale = floor;
    for (std::size_t i = 0; i < a.size(); ++i) {
      e.max_abs_error = std::max(e.max_abs_error, std::abs(a[i] - numeric[i]));
      scale = std::max({scale, std::abs(a[i]), std::abs(numeric[i])});
    }
    e.max_rel_error = e.max_abs_error / scale;
    e.passed = e.max_rel_error < tol && std::isfinite(e.max_rel_error);
    report.max_rel_error = std::max(report.max_rel_error, e.max_rel_error);
    report.passed = report.passed && e.passed;
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace rdu::tensor
