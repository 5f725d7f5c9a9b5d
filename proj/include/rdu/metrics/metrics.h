// rdu/include/rdu/metrics/metrics.h

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

#ifndef RDU_METRICS_METRICS_H_
#define RDU_METRICS_METRICS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rdu/audio/waveform.h"

namespace rdu::metrics {

struct AlignmentCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_length = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  AlignmentCounts& operator+=(const AlignmentCounts& o);
  friend bool operator==(const AlignmentCounts&, const AlignmentCounts&) = default;
};

// Levenshtein alignment with unit costs. Among minimal alignments the
// backtrace prefers match/substitution, then deletion, then insertion.
template <typename T>
AlignmentCounts edit_distance(const std::vector<T>& hyp, const std::vector<T>& ref);

// 100 * (S + I + D) / |ref| after deduplicating both sequences.
// Throws on an empty (deduplicated) reference.
double uer(const std::vector<int>& hyp, const std::vector<int>& ref);
AlignmentCounts uer_counts(const std::vector<int>& hyp, const std::vector<int>& ref);

// Same without deduplication, over arbitrary tokens.
double token_error_rate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

enum class Bucket { kClean = 0, kNoiseH = 1, kNoiseL = 2, kReverb = 3 };
inline constexpr std::array<Bucket, 4> kBuckets = {Bucket::kClean, Bucket::kNoiseH,
                                                   Bucket::kNoiseL, Bucket::kReverb};
std::string bucket_name(Bucket b);  // clean, noise_h, noise_l, reverb

// Noise at SNR >= 12.5 dB is noise_h, below is noise_l; so {15, 20} and
// {5, 10} fall as in the test grid.
Bucket bucket_of(const audio::Condition& c);
// From a manifest label ("clean", "reverb", "noise:<tag>") and SNR.
Bucket bucket_of_label(const std::string& label, std::optional<double> snr_db);

// Standard deviation in percent of an error rate p (a fraction) over n
// reference units; conservative uses p = 0.5.
double binomial_std(double p, std::size_t n, bool conservative = true);

struct EvalPair {
  std::string utt_id;
  audio::Condition condition;
  std::vector<int> hyp;
  std::vector<int> ref;
};

struct ReportCell {
  AlignmentCounts counts;
  std::size_t num_utterances = 0;
  double uer = 0.0;  // percent, pooled
  double std = 0.0;  // percent
  bool present() const { return num_utterances > 0; }
};

struct ConditionReport {
  std::array<ReportCell, 4> cells;  // indexed by Bucket
  ReportCell overall;               // pooled over every pair
  bool conservative_std = true;

  const ReportCell& cell(Bucket b) const { return cells[static_cast<std::size_t>(b)]; }
  // Human-readable table: Clean / Noise-H / Noise-L / Reverb / Overall.
  std::string table(const std::string& row_label = "UER") const;
  // One line per cell: bucket<TAB>uer<TAB>std<TAB>S<TAB>I<TAB>D<TAB>ref<TAB>utts.
  std::string records() const;
};

// Pooled per-bucket UER; n for the error bar is the bucket's reference units.
ConditionReport condition_report(const std::vector<EvalPair>& pairs, bool conservative_std = true);

}  // namespace rdu::metrics

#endif  // RDU_METRICS_METRICS_H_
