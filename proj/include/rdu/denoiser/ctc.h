// rdu/include/rdu/denoiser/ctc.h

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

#ifndef RDU_DENOISER_CTC_H_
#define RDU_DENOISER_CTC_H_

#include <span>
#include <vector>

#include "rdu/tensor/tape.h"
#include "rdu/util/error.h"

namespace rdu::denoiser {

using tensor::Tensor;
using tensor::Var;

// Raised when T frames cannot emit the target (T < |target| + repeats).
class CtcInfeasibleError : public Error {
 public:
  using Error::Error;
};

// Minimum number of frames needed to emit target.
std::size_t ctc_min_frames(std::span<const int> target);

// -log p(target | log_probs) by the forward algorithm over the
// blank-augmented label sequence. log_probs is T x V.
double ctc_nll(const Tensor& log_probs, std::span<const int> target, int blank);

// Scalar tape op with the forward-backward gradient w.r.t. log_probs.
Var ctc_loss(const Var& log_probs, std::span<const int> target, int blank);

// Best-path decoding: argmax per frame, merge repeats, drop blanks.
std::vector<int> ctc_greedy(const Tensor& log_probs, int blank);

// Exact CTC prefix probabilities for one-pass joint decoding. A state holds
// log forward variables for the prefix ending in a non-blank (r_nb) and in
// a blank (r_b) at every frame.
class CtcPrefixScorer {
 public:
  struct State {
    std::vector<double> r_nb, r_b;
    int last = -1;          // last label, -1 for the empty prefix
    double prefix = 0.0;    // log p(prefix ...), 0 for the empty prefix
  };

  CtcPrefixScorer(const Tensor& log_probs, int blank);

  State initial() const;
  // State and prefix score of g + c.
  State extend(const State& g, int c) const;
  // log p(g) as a complete labelling (score at end of sequence).
  double final_score(const State& g) const;

  std::size_t frames() const { return t_; }

 private:
  const Tensor& lp_;
  int blank_;
  std::size_t t_;
};

}  // namespace rdu::denoiser

#endif  // RDU_DENOISER_CTC_H_
