// rdu/src/denoiser/decode.cc

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

#include "rdu/denoiser/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rdu::denoiser {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Running {
  std::vector<int> tokens;  // starts with sos
  double attention = 0.0;
  CtcPrefixScorer::State ctc;
  double score = 0.0;
};

struct Candidate {
  std::size_t parent;
  int token;
  double attention;
  double ctc;
  double score;
};

}  // namespace

Hypothesis beam_search(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                       const BeamConfig& config) {
  const DenoiserConfig& mc = model.config();
  if (config.beam_size < 1) throw ConfigError("decode.beam_size: must be at least 1");
  if (!(config.ctc_weight >= 0.0 && config.ctc_weight <= 1.0)) {
    throw ConfigError("decode.ctc_weight: must lie in [0, 1]");
  }
  if (features.num_frames() == 0) throw Error("beam_search: empty features");

  Tape tape(false);
  DenoiserModel::Encoded enc = model.encode(tape, features);
  const Tensor& ctc_lp = enc.ctc_log_probs.value();
  if (!mc.has_decoder()) {
    // Best path over units and blank only; the collapse can leave a unit
    // repeated across a blank, which the deduplicated target never has.
    Hypothesis h;
    int prev = -1;
    for (std::size_t t = 0; t < ctc_lp.rows(); ++t) {
      int best = 0;
      for (int k = 1; k <= mc.blank(); ++k)
        if (ctc_lp(t, static_cast<std::size_t>(k)) > ctc_lp(t, static_cast<std::size_t>(best))) best = k;
      if (best != mc.blank() && best != prev) h.tokens.push_back(best);
      if (best != mc.blank()) prev = best;
      h.ctc += ctc_lp(t, static_cast<std::size_t>(best));
    }
    h.score = h.ctc;
    return h;
  }
  const double alpha = config.ctc_weight;
  const bool use_ctc = alpha > 0.0;
  const std::size_t t_len = features.num_frames();
  const int max_len = config.max_len > 0 ? config.max_len : static_cast<int>(2 * t_len);
  CtcPrefixScorer scorer(ctc_lp, mc.blank());
  DenoiserModel::Memory memory = model.prepare_memory(tape, enc.states);

  std::vector<Running> beam(1);
  beam[0].tokens = {mc.sos()};
  if (use_ctc) beam[0].ctc = scorer.initial();
  std::vector<Hypothesis> finished;
  auto best_finished = [&]() {
    double b = kNegInf;
    for (const auto& h : finished) b = std::max(b, h.score);
    return b;
  };

  for (int step = 0; step <= max_len && !beam.empty(); ++step) {
    const bool force_eos = step == max_len;
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < beam.size(); ++i) {
      const Running& r = beam[i];
      const Tensor att = model.decoder_log_probs(tape, memory, r.tokens).value();
      const std::size_t last_row = att.rows() - 1;
      const int prev = r.tokens.back();
      auto push = [&](int tok, double ctc_score) {
        const double a = r.attention + att(last_row, static_cast<std::size_t>(tok));
        const double s = (1.0 - alpha) * a + (use_ctc ? alpha * ctc_score : 0.0);
        cands.push_back({i, tok, a, ctc_score, s});
      };
      push(mc.eos(), use_ctc ? scorer.final_score(r.ctc) : 0.0);
      if (force_eos) continue;
      for (int u = 0; u < mc.num_units; ++u) {
        if (u == prev) continue;
        // CTC state is computed lazily for survivors; the prefix score is needed now.
        push(u, use_ctc ? scorer.extend(r.ctc, u).prefix : 0.0);
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    std::vector<Running> next;
    for (const Candidate& c : cands) {
      if (static_cast<int>(next.size()) >= config.beam_size) break;
      const Running& p = beam[c.parent];
      if (c.token == mc.eos()) {
        Hypothesis h;
        h.tokens.assign(p.tokens.begin() + 1, p.tokens.end());
        h.score = c.score;
        h.attention = c.attention;
        h.ctc = c.ctc;
        finished.push_back(std::move(h));
        continue;
      }
      Running r;
      r.tokens = p.tokens;
      r.tokens.push_back(c.token);
      r.attention = c.attention;
      if (use_ctc) r.ctc = scorer.extend(p.ctc, c.token);
      r.score = c.score;
      next.push_back(std::move(r));
    }
    beam = std::move(next);
    // Extensions can only lower both score terms, so a finished hypothesis
    // that beats every running one is final.
    if (!finished.empty()) {
      double best_running = kNegInf;
      for (const auto& r : beam) best_running = std::max(best_running, r.score);
      if (best_finished() >= best_running) break;
    }
  }
  if (finished.empty()) throw NumericalError("beam_search: no hypothesis reached eos");
  return *std::max_element(finished.begin(), finished.end(),
                           [](const Hypothesis& a, const Hypothesis& b) { return a.score < b.score; });
}

std::vector<int> decode_units(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                              const BeamConfig& config) {
  return beam_search(model, features, config).tokens;
}

double joint_score(const DenoiserModel& model, const ssl::LayerStackFeatures& features,
                   const std::vector<int>& units, double ctc_weight) {
  const DenoiserConfig& mc = model.config();
  Tape tape(false);
  DenoiserModel::Encoded enc = model.encode(tape, features);
  std::vector<int> in{mc.sos()}, out = units;
  in.insert(in.end(), units.begin(), units.end());
  out.push_back(mc.eos());
  const Tensor att = model.decoder_log_probs(tape, model.prepare_memory(tape, enc.states), in).value();
  double a = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) a += att(i, static_cast<std::size_t>(out[i]));
  double c = 0.0;
  if (ctc_weight > 0.0) {
    c = units.size() > 0 && ctc_min_frames(units) > features.num_frames()
            ? kNegInf
            : -ctc_nll(enc.ctc_log_probs.value(), units, mc.blank());
  }
  return (1.0 - ctc_weight) * a + ctc_weight * c;
}

}  // namespace rdu::denoiser
