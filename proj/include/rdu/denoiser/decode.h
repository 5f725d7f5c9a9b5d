// rdu/include/rdu/denoiser/decode.h

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

#ifndef RDU_DENOISER_DECODE_H_
#define RDU_DENOISER_DECODE_H_

#include <vector>

#include "rdu/denoiser/model.h"

namespace rdu::denoiser {

struct BeamConfig {
  int beam_size = 10;
  double ctc_weight = 0.3;  // alpha
  int max_len = 0;          // 0: twice the frame count
};

struct Hypothesis {
  std::vector<int> tokens;  // units only, no sos/eos
  double score = 0.0;       // (1 - alpha) * attention + alpha * ctc
  double attention = 0.0;
  double ctc = 0.0;
};

// Joint attention/CTC one-pass beam search. Expansions never repeat the
// previous unit, so hypotheses are deduplicated by construction. A model
// without decoder returns the deduplicated CTC best path over units and blank.
Hypothesis beam_search(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                       const BeamConfig& config);

std::vector<int> decode_units(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                              const BeamConfig& config);

// Joint score of a complete unit sequence, as used by beam_search.
double joint_score(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                   const std::vector<int>& units, double ctc_weight);

}  // namespace rdu::denoiser

#endif  // RDU_DENOISER_DECODE_H_
