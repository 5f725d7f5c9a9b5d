// rdu/src/util/fft.cc

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

#include "rdu/util/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "rdu/util/error.h"

namespace rdu {
namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n == 0) throw Error("RealFft: size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  real_ = fftw_alloc_real(n);
  auto* cplx = fftw_alloc_complex(n / 2 + 1);
  complex_ = cplx;
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, cplx, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cplx, real_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_);
  fftw_free(static_cast<fftw_complex*>(complex_));
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) {
  if (input.size() > n_) throw Error("RealFft::forward: input longer than transform");
  std::fill(real_, real_ + n_, 0.0);
  std::copy(input.begin(), input.end(), real_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  auto* c = static_cast<fftw_complex*>(complex_);
  std::vector<std::complex<double>> out(n_ / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {c[k][0], c[k][1]};
  return out;
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> spectrum) {
  if (spectrum.size() != n_ / 2 + 1) throw Error("RealFft::inverse: wrong spectrum size");
  auto* c = static_cast<fftw_complex*>(complex_);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    c[k][0] = spectrum[k].real();
    c[k][1] = spectrum[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::vector<double> out(real_, real_ + n_);
  const double inv = 1.0 / static_cast<double>(n_);
  for (double& v : out) v *= inv;
  return out;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t full = a.size() + b.size() - 1;
  std::size_t n = 1;
  while (n < full) n <<= 1;
  RealFft fft(n);
  auto fa = fft.forward(a);
  auto fb = fft.forward(b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto out = fft.inverse(fa);
  out.resize(full);
  return out;
}

}  // namespace rdu
