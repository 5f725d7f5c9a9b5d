// rdu/include/rdu/util/fft.h

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

#ifndef RDU_UTIL_FFT_H_
#define RDU_UTIL_FFT_H_

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace rdu {

// Real-input FFT of a fixed size backed by FFTW. Plans are created under a
// global lock; execute() may run concurrently on distinct objects.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return n_; }
  // input.size() <= n (zero padded); returns n/2+1 bins.
  std::vector<std::complex<double>> forward(std::span<const double> input);
  // Inverse of forward() including the 1/n normalisation.
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum);

 private:
  std::size_t n_;
  double* real_;
  void* complex_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Full linear convolution (length a.size() + b.size() - 1) via FFT.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace rdu

#endif  // RDU_UTIL_FFT_H_
