// rdu/src/tensor/tensor.cc

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

#include "rdu/tensor/tensor.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <cblas.h>

#include "rdu/util/error.h"

namespace rdu::tensor {

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream ss;
  ss << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) ss << 'x';
    ss << shape[i];
  }
  ss << ']';
  return ss.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("Tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_string(shape_));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("Tensor::item: tensor of shape " + shape_string(shape_) +
                     " is not a scalar");
  }
  return data_[0];
}

Tensor Tensor::reshaped(Shape shape) const {
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double max_abs(const Tensor& t) {
  double m = 0.0;
  for (double v : t.values()) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void check_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got shape " +
                     shape_string(t.shape()));
  }
}

void prepare_out(Tensor& c, std::size_t m, std::size_t n, bool accumulate,
                 const char* op) {
  if (accumulate) {
    if (c.rank() != 2 || c.rows() != m || c.cols() != n) {
      throw ShapeError(std::string(op) + ": accumulator has shape " +
                       shape_string(c.shape()));
    }
  } else if (c.rank() != 2 || c.rows() != m || c.cols() != n) {
    c = Tensor::matrix(m, n);
  } else {
    c.fill(0.0);
  }
}

// C += op(A) op(B); prepare_out has already zeroed C when not accumulating.
void blas_gemm(CBLAS_TRANSPOSE ta, CBLAS_TRANSPOSE tb, std::size_t m, std::size_t n, std::size_t k,
               const double* a, std::size_t lda, const double* b, std::size_t ldb, double* c,
               std::size_t ldc) {
  if (k == 0) return;
  // One BLAS thread: results must not depend on the machine's core count.
  static const int kThreads = (openblas_set_num_threads(1), 1);
  (void)kThreads;
  cblas_dgemm(CblasRowMajor, ta, tb, static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0,
              a, static_cast<int>(lda), b, static_cast<int>(ldb), 1.0, c, static_cast<int>(ldc));
}

}  // namespace

void gemm_nn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_rank2(a, "gemm_nn");
  check_rank2(b, "gemm_nn");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("gemm_nn: inner dimensions " + shape_string(a.shape()) +
                     " * " + shape_string(b.shape()));
  }
  prepare_out(c, m, n, accumulate, "gemm_nn");
  if (m == 0 || n == 0) return;
  blas_gemm(CblasNoTrans, CblasNoTrans, m, n, k, a.data(), k, b.data(), n, c.data(), n);
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_rank2(a, "gemm_nt");
  check_rank2(b, "gemm_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("gemm_nt: inner dimensions " + shape_string(a.shape()) +
                     " * " + shape_string(b.shape()) + "^T");
  }
  prepare_out(c, m, n, accumulate, "gemm_nt");
  if (m == 0 || n == 0) return;
  blas_gemm(CblasNoTrans, CblasTrans, m, n, k, a.data(), k, b.data(), k, c.data(), n);
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate) {
  check_rank2(a, "gemm_tn");
  check_rank2(b, "gemm_tn");
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("gemm_tn: inner dimensions " + shape_string(a.shape()) +
                     "^T * " + shape_string(b.shape()));
  }
  prepare_out(c, m, n, accumulate, "gemm_tn");
  if (m == 0 || n == 0) return;
  blas_gemm(CblasTrans, CblasNoTrans, m, n, k, a.data(), m, b.data(), n, c.data(), n);
}

}  // namespace rdu::tensor
