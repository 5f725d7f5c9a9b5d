// rdu/src/denoiser/ctc.cc

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

#include "rdu/denoiser/ctc.h"

#include <cmath>
#include <limits>
#include <memory>
#include <string>

namespace rdu::denoiser {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logadd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_inputs(const Tensor& lp, std::span<const int> target, int blank, const char* op) {
  if (lp.rank() != 2 || lp.rows() == 0) {
    throw ShapeError(std::string(op) + ": expected T x V log-probs, got " +
                     tensor::shape_string(lp.shape()));
  }
  const auto v = static_cast<int>(lp.cols());
  if (blank < 0 || blank >= v) throw ShapeError(std::string(op) + ": blank outside vocabulary");
  for (int c : target) {
    if (c < 0 || c >= v || c == blank) {
      throw ShapeError(std::string(op) + ": target label " + std::to_string(c) + " invalid");
    }
  }
  const std::size_t need = ctc_min_frames(target);
  if (lp.rows() < need) {
    throw CtcInfeasibleError(std::string(op) + ": target needs " + std::to_string(need) +
                             " frames, only " + std::to_string(lp.rows()) + " available");
  }
}

struct Lattice {
  std::vector<int> ext;        // blank-augmented labels, length 2U+1
  std::vector<double> alpha;   // T x S
  std::vector<double> beta;    // T x S
  double log_p = kNegInf;
};

Lattice forward_backward(const Tensor& lp, std::span<const int> target, int blank, bool need_beta) {
  Lattice L;
  L.ext.push_back(blank);
  for (int c : target) {
    L.ext.push_back(c);
    L.ext.push_back(blank);
  }
  const std::size_t t_len = lp.rows(), s_len = L.ext.size();
  auto y = [&](std::size_t t, std::size_t s) { return lp(t, static_cast<std::size_t>(L.ext[s])); };
  auto skip_ok = [&](std::size_t s) { return s >= 2 && L.ext[s] != blank && L.ext[s] != L.ext[s - 2]; };

  L.alpha.assign(t_len * s_len, kNegInf);
  auto A = [&](std::size_t t, std::size_t s) -> double& { return L.alpha[t * s_len + s]; };
  A(0, 0) = y(0, 0);
  if (s_len > 1) A(0, 1) = y(0, 1);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t s = 0; s < s_len; ++s) {
      double a = A(t - 1, s);
      if (s >= 1) a = logadd(a, A(t - 1, s - 1));
      if (skip_ok(s)) a = logadd(a, A(t - 1, s - 2));
      A(t, s) = a == kNegInf ? kNegInf : a + y(t, s);
    }
  }
  L.log_p = A(t_len - 1, s_len - 1);
  if (s_len > 1) L.log_p = logadd(L.log_p, A(t_len - 1, s_len - 2));

  if (need_beta) {
    L.beta.assign(t_len * s_len, kNegInf);
    auto B = [&](std::size_t t, std::size_t s) -> double& { return L.beta[t * s_len + s]; };
    B(t_len - 1, s_len - 1) = y(t_len - 1, s_len - 1);
    if (s_len > 1) B(t_len - 1, s_len - 2) = y(t_len - 1, s_len - 2);
    for (std::size_t t = t_len - 1; t-- > 0;) {
      for (std::size_t s = 0; s < s_len; ++s) {
        double b = B(t + 1, s);
        if (s + 1 < s_len) b = logadd(b, B(t + 1, s + 1));
        if (s + 2 < s_len && skip_ok(s + 2)) b = logadd(b, B(t + 1, s + 2));
        B(t, s) = b == kNegInf ? kNegInf : b + y(t, s);
      }
    }
  }
  return L;
}

}  // namespace

std::size_t ctc_min_frames(std::span<const int> target) {
  std::size_t repeats = 0;
  for (std::size_t i = 1; i < target.size(); ++i)
    if (target[i] == target[i - 1]) ++repeats;
  return target.size() + repeats;
}

double ctc_nll(const Tensor& log_probs, std::span<const int> target, int blank) {
  check_inputs(log_probs, target, blank, "ctc_loss");
  return -forward_backward(log_probs, target, blank, false).log_p;
}

Var ctc_loss(const Var& log_probs, std::span<const int> target, int blank) {
  const Tensor& lp = log_probs.value();
  check_inputs(lp, target, blank, "ctc_loss");
  auto lat = std::make_shared<Lattice>(forward_backward(lp, target, blank, true));
  if (!std::isfinite(lat->log_p)) {
    throw NumericalError("ctc_loss: target has zero probability under the given log-probs");
  }
  return log_probs.tape().record(
      Tensor::scalar(-lat->log_p), {log_probs}, [log_probs, lat](tensor::Tape& t, const Tensor& g) {
        Tensor& d = t.grad(log_probs.id());
        const Tensor& lp = log_probs.value();
        const std::size_t s_len = lat->ext.size();
        for (std::size_t tt = 0; tt < lp.rows(); ++tt) {
          for (std::size_t s = 0; s < s_len; ++s) {
            const double a = lat->alpha[tt * s_len + s], b = lat->beta[tt * s_len + s];
            if (a == kNegInf || b == kNegInf) continue;
            const auto k = static_cast<std::size_t>(lat->ext[s]);
            // alpha and beta both include y_t(k); divide one copy out.
            const double occ = std::exp(a + b - lp(tt, k) - lat->log_p);
            d(tt, k) -= g.item() * occ;
          }
        }
      });
}

std::vector<int> ctc_greedy(const Tensor& log_probs, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (std::size_t t = 0; t < log_probs.rows(); ++t) {
    int best = 0;
    for (std::size_t k = 1; k < log_probs.cols(); ++k)
      if (log_probs(t, k) > log_probs(t, static_cast<std::size_t>(best))) best = static_cast<int>(k);
    if (best != blank && best != prev) out.push_back(best);
    prev = best;
  }
  return out;
}

CtcPrefixScorer::CtcPrefixScorer(const Tensor& log_probs, int blank)
    : lp_(log_probs), blank_(blank), t_(log_probs.rows()) {
  if (log_probs.rank() != 2 || t_ == 0) throw ShapeError("ctc prefix scorer: empty log-probs");
}

CtcPrefixScorer::State CtcPrefixScorer::initial() const {
  State s;
  s.r_nb.assign(t_, kNegInf);
  s.r_b.assign(t_, kNegInf);
  double acc = 0.0;
  for (std::size_t t = 0; t < t_; ++t) {
    acc += lp_(t, static_cast<std::size_t>(blank_));
    s.r_b[t] = acc;
  }
  return s;
}

CtcPrefixScorer::State CtcPrefixScorer::extend(const State& g, int c) const {
  const auto ci = static_cast<std::size_t>(c);
  const auto bi = static_cast<std::size_t>(blank_);
  State h;
  h.last = c;
  h.r_nb.assign(t_, kNegInf);
  h.r_b.assign(t_, kNegInf);
  if (g.last < 0) h.r_nb[0] = lp_(0, ci);
  double psi = h.r_nb[0];
  for (std::size_t t = 1; t < t_; ++t) {
    const double phi = (c == g.last) ? g.r_b[t - 1] : logadd(g.r_b[t - 1], g.r_nb[t - 1]);
    const double nb = logadd(h.r_nb[t - 1], phi);
    h.r_nb[t] = nb == kNegInf ? kNegInf : nb + lp_(t, ci);
    const double b = logadd(h.r_b[t - 1], h.r_nb[t - 1]);
    h.r_b[t] = b == kNegInf ? kNegInf : b + lp_(t, bi);
    if (phi != kNegInf) psi = logadd(psi, phi + lp_(t, ci));
  }
  h.prefix = psi;
  return h;
}

double CtcPrefixScorer::final_score(const State& g) const {
  return logadd(g.r_nb[t_ - 1], g.r_b[t_ - 1]);
}

}  // namespace rdu::denoiser
