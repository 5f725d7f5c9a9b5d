// rdu/src/tensor/ops.cc

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

#include "rdu/tensor/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>

#include "rdu/util/error.h"

namespace rdu::tensor {
namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw ShapeError(std::string(op) + ": " + detail);
}

std::string shapes(const Var& a, const Var& b) {
  return shape_string(a.shape()) + " vs " + shape_string(b.shape());
}

void accumulate(Tape& tape, const Var& v, const Tensor& g) {
  if (!tape.requires_grad(v.id())) return;
  Tensor& dst = tape.grad(v.id());
  double* d = dst.data();
  const double* s = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

// Rows/cols view of a rank-1 or rank-2 tensor.
struct Dims {
  std::size_t rows, cols;
};

Dims dims2(const Tensor& t, const char* op) {
  if (t.rank() == 1) return {1, t.dim(0)};
  require(t.rank() == 2, op, "expected rank 1 or 2, got " + shape_string(t.shape()));
  return {t.rows(), t.cols()};
}

// Calls fn(offset, stride, count) for every 1-D lane along `axis`.
template <typename Fn>
void for_each_lane(const Tensor& t, int axis, const char* op, Fn fn) {
  Dims d = dims2(t, op);
  if (t.rank() == 1) require(axis == 0 || axis == -1, op, "axis out of range");
  bool along_cols = t.rank() == 1 || axis == 1 || axis == -1;
  require(along_cols || axis == 0, op, "axis out of range");
  if (along_cols) {
    for (std::size_t r = 0; r < d.rows; ++r) fn(r * d.cols, 1, d.cols);
  } else {
    for (std::size_t c = 0; c < d.cols; ++c) fn(c, d.cols, d.rows);
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.value().rank() == 2 && b.value().rank() == 2 &&
              a.value().cols() == b.value().rows(),
          "matmul", shapes(a, b));
  Tensor out;
  gemm_nn(a.value(), b.value(), out, false);
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a.id())) gemm_nt(g, b.value(), t.grad(a.id()), true);
    if (t.requires_grad(b.id())) gemm_tn(a.value(), g, t.grad(b.id()), true);
  });
}

Var transpose(const Var& a) {
  const Tensor& x = a.value();
  require(x.rank() == 2, "transpose", "expected a matrix, got " + shape_string(x.shape()));
  Tensor out = Tensor::matrix(x.cols(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    for (std::size_t i = 0; i < d.rows(); ++i)
      for (std::size_t j = 0; j < d.cols(); ++j) d(i, j) += g(j, i);
  });
}

Var add(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "add", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    accumulate(t, a, g);
    accumulate(t, b, g);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "sub", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    accumulate(t, a, g);
    if (t.requires_grad(b.id())) {
      Tensor& d = t.grad(b.id());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require(a.shape() == b.shape(), "mul", shapes(a, b));
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return a.tape().record(std::move(out), {a, b}, [a, b](Tape& t, const Tensor& g) {
    if (t.requires_grad(a.id())) {
      Tensor& d = t.grad(a.id());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * b.value()[i];
    }
    if (t.requires_grad(b.id())) {
      Tensor& d = t.grad(b.id());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * a.value()[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a.value();
  for (double& v : out.values()) v *= s;
  return a.tape().record(std::move(out), {a}, [a, s](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s * g[i];
  });
}

Var add_row(const Var& a, const Var& bias) {
  Dims d = dims2(a.value(), "add_row");
  require(bias.value().size() == d.cols, "add_row", shapes(a, bias));
  Tensor out = a.value();
  const double* b = bias.value().data();
  for (std::size_t r = 0; r < d.rows; ++r) {
    double* row = out.data() + r * d.cols;
    for (std::size_t c = 0; c < d.cols; ++c) row[c] += b[c];
  }
  return a.tape().record(std::move(out), {a, bias}, [a, bias, d](Tape& t, const Tensor& g) {
    accumulate(t, a, g);
    if (t.requires_grad(bias.id())) {
      Tensor& db = t.grad(bias.id());
      for (std::size_t r = 0; r < d.rows; ++r)
        for (std::size_t c = 0; c < d.cols; ++c) db[c] += g[r * d.cols + c];
    }
  });
}

Var scale_by(const Var& a, const Var& s) {
  require(s.value().size() == 1, "scale_by", "scale must have one element, got " +
                                                 shape_string(s.shape()));
  const double sv = s.value()[0];
  Tensor out = a.value();
  for (double& v : out.values()) v *= sv;
  return a.tape().record(std::move(out), {a, s}, [a, s](Tape& t, const Tensor& g) {
    const double sv = s.value()[0];
    if (t.requires_grad(a.id())) {
      Tensor& d = t.grad(a.id());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += sv * g[i];
    }
    if (t.requires_grad(s.id())) {
      double acc = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * a.value()[i];
      t.grad(s.id())[0] += acc;
    }
  });
}

Var softmax(const Var& a, int axis) {
  Tensor out = a.value();
  for_each_lane(out, axis, "softmax", [&](std::size_t off, std::size_t stride, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, out[off + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double& v = out[off + i * stride];
      v = std::exp(v - m);
      z += v;
    }
    for (std::size_t i = 0; i < n; ++i) out[off + i * stride] /= z;
  });
  Tape& tape = a.tape();
  if (!tape.recording()) return tape.record(std::move(out), {a}, nullptr);
  auto saved = std::make_shared<Tensor>(out);
  return tape.record(std::move(out), {a}, [a, saved, axis](Tape& t, const Tensor& g) {
    const Tensor& yv = *saved;
    Tensor& d = t.grad(a.id());
    for_each_lane(yv, axis, "softmax", [&](std::size_t off, std::size_t stride, std::size_t n) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += g[off + i * stride] * yv[off + i * stride];
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = off + i * stride;
        d[k] += yv[k] * (g[k] - dot);
      }
    });
  });
}

Var log_softmax(const Var& a, int axis) {
  Tensor out = a.value();
  for_each_lane(out, axis, "log_softmax", [&](std::size_t off, std::size_t stride, std::size_t n) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, out[off + i * stride]);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::exp(out[off + i * stride] - m);
    const double lz = m + std::log(z);
    for (std::size_t i = 0; i < n; ++i) out[off + i * stride] -= lz;
  });
  Tape& tape = a.tape();
  if (!tape.recording()) return tape.record(std::move(out), {a}, nullptr);
  auto saved = std::make_shared<Tensor>(out);
  return tape.record(std::move(out), {a}, [a, saved, axis](Tape& t, const Tensor& g) {
    const Tensor& ls = *saved;
    Tensor& d = t.grad(a.id());
    for_each_lane(ls, axis, "log_softmax", [&](std::size_t off, std::size_t stride, std::size_t n) {
      double gs = 0.0;
      for (std::size_t i = 0; i < n; ++i) gs += g[off + i * stride];
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = off + i * stride;
        d[k] += g[k] - std::exp(ls[k]) * gs;
      }
    });
  });
}

Var tanh(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = std::tanh(v);
  Tape& tape = a.tape();
  if (!tape.recording()) return tape.record(std::move(out), {a}, nullptr);
  auto saved = std::make_shared<Tensor>(out);
  return tape.record(std::move(out), {a}, [a, saved](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    const Tensor& y = *saved;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * (1.0 - y[i] * y[i]);
  });
}

Var gelu(const Var& a) {
  Tensor out = a.value();
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (double& v : out.values()) v = 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    Tensor& d = t.grad(a.id());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double cdf = 0.5 * (1.0 + std::erf(x[i] * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x[i] * x[i]);
      d[i] += g[i] * (cdf + x[i] * pdf);
    }
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return a.tape().record(std::move(out), {a}, [a](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    const Tensor& x = a.value();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += x[i] > 0.0 ? g[i] : 0.0;
  });
}

Var layer_norm(const Var& a, const Var& gamma, const Var& beta, double eps) {
  Dims d = dims2(a.value(), "layer_norm");
  if (gamma.valid())
    require(gamma.value().size() == d.cols, "layer_norm", "gamma " + shapes(a, gamma));
  if (beta.valid())
    require(beta.value().size() == d.cols, "layer_norm", "beta " + shapes(a, beta));
  const Tensor& x = a.value();
  auto xhat = std::make_shared<Tensor>(x.shape(), 0.0);
  auto inv_std = std::make_shared<std::vector<double>>(d.rows);
  Tensor out(x.shape(), 0.0);
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* xr = x.data() + r * d.cols;
    double mu = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) mu += xr[c];
    mu /= static_cast<double>(d.cols);
    double var = 0.0;
    for (std::size_t c = 0; c < d.cols; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= static_cast<double>(d.cols);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < d.cols; ++c) {
      const double h = (xr[c] - mu) * is;
      (*xhat)[r * d.cols + c] = h;
      double y = h;
      if (gamma.valid()) y *= gamma.value()[c];
      if (beta.valid()) y += beta.value()[c];
      out[r * d.cols + c] = y;
    }
  }
  std::vector<Var> parents{a};
  if (gamma.valid()) parents.push_back(gamma);
  if (beta.valid()) parents.push_back(beta);
  return a.tape().record(std::move(out), parents,
                         [a, gamma, beta, xhat, inv_std, d](Tape& t, const Tensor& g) {
    const double n = static_cast<double>(d.cols);
    if (gamma.valid() && t.requires_grad(gamma.id())) {
      Tensor& dg = t.grad(gamma.id());
      for (std::size_t r = 0; r < d.rows; ++r)
        for (std::size_t c = 0; c < d.cols; ++c) dg[c] += g[r * d.cols + c] * (*xhat)[r * d.cols + c];
    }
    if (beta.valid() && t.requires_grad(beta.id())) {
      Tensor& db = t.grad(beta.id());
      for (std::size_t r = 0; r < d.rows; ++r)
        for (std::size_t c = 0; c < d.cols; ++c) db[c] += g[r * d.cols + c];
    }
    if (!t.requires_grad(a.id())) return;
    Tensor& dx = t.grad(a.id());
    std::vector<double> dh(d.cols);
    for (std::size_t r = 0; r < d.rows; ++r) {
      double mean_dh = 0.0, mean_dh_h = 0.0;
      for (std::size_t c = 0; c < d.cols; ++c) {
        dh[c] = g[r * d.cols + c] * (gamma.valid() ? gamma.value()[c] : 1.0);
        mean_dh += dh[c];
        mean_dh_h += dh[c] * (*xhat)[r * d.cols + c];
      }
      mean_dh /= n;
      mean_dh_h /= n;
      for (std::size_t c = 0; c < d.cols; ++c) {
        dx[r * d.cols + c] +=
            (*inv_std)[r] * (dh[c] - mean_dh - (*xhat)[r * d.cols + c] * mean_dh_h);
      }
    }
  });
}

Var embedding_lookup(const Var& table, std::span<const int> ids) {
  const Tensor& w = table.value();
  require(w.rank() == 2, "embedding_lookup", "table must be a matrix, got " + shape_string(w.shape()));
  Tensor out = Tensor::matrix(ids.size(), w.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < w.rows(), "embedding_lookup",
            "id " + std::to_string(ids[i]) + " outside table of " + std::to_string(w.rows()) + " rows");
    std::copy_n(w.data() + ids[i] * w.cols(), w.cols(), out.data() + i * w.cols());
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return table.tape().record(std::move(out), {table}, [table, idv](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(table.id());
    const std::size_t cols = d.cols();
    for (std::size_t i = 0; i < idv.size(); ++i)
      for (std::size_t c = 0; c < cols; ++c) d[idv[i] * cols + c] += g[i * cols + c];
  });
}

Var pick(const Var& a, std::span<const int> ids) {
  Dims d = dims2(a.value(), "pick");
  require(ids.size() == d.rows, "pick", "need one index per row: " + std::to_string(ids.size()) +
                                            " indices for " + shape_string(a.shape()));
  Tensor out(Shape{d.rows}, 0.0);
  for (std::size_t r = 0; r < d.rows; ++r) {
    require(ids[r] >= 0 && static_cast<std::size_t>(ids[r]) < d.cols, "pick", "index out of range");
    out[r] = a.value()[r * d.cols + ids[r]];
  }
  std::vector<int> idv(ids.begin(), ids.end());
  return a.tape().record(std::move(out), {a}, [a, idv, d](Tape& t, const Tensor& g) {
    Tensor& dx = t.grad(a.id());
    for (std::size_t r = 0; r < d.rows; ++r) dx[r * d.cols + idv[r]] += g[r];
  });
}

Var concat(const std::vector<Var>& parts, int axis) {
  require(!parts.empty(), "concat", "no operands");
  const Tensor& first = parts[0].value();
  if (first.rank() == 1) {
    require(axis == 0, "concat", "axis out of range for vectors");
    std::vector<double> data;
    for (const Var& p : parts) {
      require(p.value().rank() == 1, "concat", "mixed ranks");
      data.insert(data.end(), p.value().values().begin(), p.value().values().end());
    }
    Tensor out(Shape{data.size()}, std::move(data));
    return parts[0].tape().record(std::move(out), parts, [parts](Tape& t, const Tensor& g) {
      std::size_t off = 0;
      for (const Var& p : parts) {
        const std::size_t n = p.value().size();
        if (t.requires_grad(p.id())) {
          Tensor& d = t.grad(p.id());
          for (std::size_t i = 0; i < n; ++i) d[i] += g[off + i];
        }
        off += n;
      }
    });
  }
  require(first.rank() == 2 && (axis == 0 || axis == 1), "concat", "expected matrices, axis 0 or 1");
  std::size_t rows = 0, cols = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    require(v.rank() == 2, "concat", "mixed ranks");
    if (axis == 0) {
      require(v.cols() == first.cols(), "concat", "column mismatch " + shapes(parts[0], p));
      rows += v.rows();
    } else {
      require(v.rows() == first.rows(), "concat", "row mismatch " + shapes(parts[0], p));
      cols += v.cols();
    }
  }
  if (axis == 0) cols = first.cols();
  else rows = first.rows();
  Tensor out = Tensor::matrix(rows, cols);
  std::size_t off = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) {
        if (axis == 0) out(off + r, c) = v(r, c);
        else out(r, off + c) = v(r, c);
      }
    off += axis == 0 ? v.rows() : v.cols();
  }
  return parts[0].tape().record(std::move(out), parts, [parts, axis](Tape& t, const Tensor& g) {
    std::size_t off = 0;
    for (const Var& p : parts) {
      const std::size_t pr = p.value().rows(), pc = p.value().cols();
      if (t.requires_grad(p.id())) {
        Tensor& d = t.grad(p.id());
        for (std::size_t r = 0; r < pr; ++r)
          for (std::size_t c = 0; c < pc; ++c)
            d(r, c) += axis == 0 ? g(off + r, c) : g(r, off + c);
      }
      off += axis == 0 ? pr : pc;
    }
  });
}

Var slice(const Var& a, int axis, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  if (x.rank() == 1) {
    require(axis == 0 && begin <= end && end <= x.size(), "slice", "range out of bounds");
    Tensor out(Shape{end - begin},
               std::vector<double>(x.values().begin() + begin, x.values().begin() + end));
    return a.tape().record(std::move(out), {a}, [a, begin](Tape& t, const Tensor& g) {
      Tensor& d = t.grad(a.id());
      for (std::size_t i = 0; i < g.size(); ++i) d[begin + i] += g[i];
    });
  }
  require(x.rank() == 2 && (axis == 0 || axis == 1), "slice", "expected a matrix, axis 0 or 1");
  const std::size_t limit = axis == 0 ? x.rows() : x.cols();
  require(begin <= end && end <= limit, "slice",
          "range [" + std::to_string(begin) + "," + std::to_string(end) + ") out of bounds for " +
              shape_string(x.shape()));
  const std::size_t rows = axis == 0 ? end - begin : x.rows();
  const std::size_t cols = axis == 1 ? end - begin : x.cols();
  Tensor out = Tensor::matrix(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      out(r, c) = axis == 0 ? x(begin + r, c) : x(r, begin + c);
  return a.tape().record(std::move(out), {a}, [a, axis, begin](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) {
        if (axis == 0) d(begin + r, c) += g(r, c);
        else d(r, begin + c) += g(r, c);
      }
  });
}

Var sum(const Var& a) {
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(Tensor::scalar(s), {a}, [a](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    for (double& v : d.values()) v += g[0];
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  require(n > 0, "mean", "empty tensor");
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return a.tape().record(Tensor::scalar(s / static_cast<double>(n)), {a},
                         [a, n](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    const double w = g[0] / static_cast<double>(n);
    for (double& v : d.values()) v += w;
  });
}

Var dropout(const Var& a, double p, bool train, Rng& rng) {
  if (!train || p <= 0.0) return a;
  require(p < 1.0, "dropout", "p must be < 1");
  auto mask = std::make_shared<std::vector<double>>(a.value().size());
  std::bernoulli_distribution keep(1.0 - p);
  const double inv = 1.0 / (1.0 - p);
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = keep(rng) ? inv : 0.0;
    out[i] *= (*mask)[i];
  }
  return a.tape().record(std::move(out), {a}, [a, mask](Tape& t, const Tensor& g) {
    Tensor& d = t.grad(a.id());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * (*mask)[i];
  });
}

Var weighted_sum(const Var& weights, const std::vector<Var>& layers) {
  require(!layers.empty(), "weighted_sum", "no layers");
  require(weights.value().size() == layers.size(), "weighted_sum",
          std::to_string(weights.value().size()) + " weights for " +
              std::to_string(layers.size()) + " layers");
  const Shape& shape = layers[0].shape();
  Tensor out(shape, 0.0);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].shape() == shape, "weighted_sum", shapes(layers[0], layers[l]));
    const double w = weights.value()[l];
    const double* x = layers[l].value().data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * x[i];
  }
  std::vector<Var> parents{weights};
  parents.insert(parents.end(), layers.begin(), layers.end());
  return weights.tape().record(std::move(out), parents, [weights, layers](Tape& t, const Tensor& g) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const Tensor& x = layers[l].value();
      if (t.requires_grad(weights.id())) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x[i];
        t.grad(weights.id())[l] += acc;
      }
      if (t.requires_grad(layers[l].id())) {
        Tensor& d = t.grad(layers[l].id());
        const double w = weights.value()[l];
        for (std::size_t i = 0; i < g.size(); ++i) d[i] += w * g[i];
      }
    }
  });
}

}  // namespace rdu::tensor
