// rdu/src/metrics/metrics.cc

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

#include "rdu/metrics/metrics.h"

#include <cmath>
#include <cstdio>

#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace rdu::metrics {

AlignmentCounts& AlignmentCounts::operator+=(const AlignmentCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_length += o.ref_length;
  return *this;
}

template <typename T>
AlignmentCounts edit_distance(const std::vector<T>& hyp, const std::vector<T>& ref) {
  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: aligning ref[0..i) with hyp[0..j).
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  AlignmentCounts c;
  c.ref_length = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

template AlignmentCounts edit_distance<int>(const std::vector<int>&, const std::vector<int>&);
template AlignmentCounts edit_distance<std::string>(const std::vector<std::string>&,
                                                    const std::vector<std::string>&);

namespace {

std::vector<int> dedup(const std::vector<int>& v) {
  std::vector<int> out;
  for (int x : v)
    if (out.empty() || out.back() != x) out.push_back(x);
  return out;
}

}  // namespace

AlignmentCounts uer_counts(const std::vector<int>& hyp, const std::vector<int>& ref) {
  const auto r = dedup(ref);
  if (r.empty()) throw Error("uer: empty reference");
  return edit_distance(dedup(hyp), r);
}

double uer(const std::vector<int>& hyp, const std::vector<int>& ref) {
  const AlignmentCounts c = uer_counts(hyp, ref);
  return 100.0 * double(c.errors()) / double(c.ref_length);
}

double token_error_rate(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (ref.empty()) throw Error("token_error_rate: empty reference");
  const AlignmentCounts c = edit_distance(hyp, ref);
  return 100.0 * double(c.errors()) / double(c.ref_length);
}

std::string bucket_name(Bucket b) {
  switch (b) {
    case Bucket::kClean: return "clean";
    case Bucket::kNoiseH: return "noise_h";
    case Bucket::kNoiseL: return "noise_l";
    case Bucket::kReverb: return "reverb";
  }
  return "?";
}

Bucket bucket_of(const audio::Condition& c) {
  switch (c.type) {
    case audio::AugType::kClean: return Bucket::kClean;
    case audio::AugType::kReverb: return Bucket::kReverb;
    case audio::AugType::kNoise:
      if (!std::isfinite(c.snr_db)) throw Error("condition: noise without a finite SNR");
      return c.snr_db >= 12.5 ? Bucket::kNoiseH : Bucket::kNoiseL;
  }
  throw Error("condition: unknown type");
}

Bucket bucket_of_label(const std::string& label, std::optional<double> snr_db) {
  if (label == "clean") return Bucket::kClean;
  if (label == "reverb") return Bucket::kReverb;
  if (label.rfind("noise:", 0) == 0 && label.size() > 6) {
    if (!snr_db) throw Error("condition '" + label + "': missing SNR");
    return bucket_of(audio::Condition::noise(label.substr(6), *snr_db));
  }
  throw Error("unknown condition label '" + label + "'");
}

double binomial_std(double p, std::size_t n, bool conservative) {
  if (n == 0) throw Error("binomial_std: n must be positive");
  const double pe = conservative ? 0.5 : std::clamp(p, 0.0, 1.0);
  return 100.0 * std::sqrt(pe * (1.0 - pe) / double(n));
}

namespace {

void finish(ReportCell& cell, bool conservative) {
  if (!cell.present()) return;
  cell.uer = 100.0 * double(cell.counts.errors()) / double(cell.counts.ref_length);
  cell.std = binomial_std(cell.uer / 100.0, cell.counts.ref_length, conservative);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

ConditionReport condition_report(const std::vector<EvalPair>& pairs, bool conservative_std) {
  ConditionReport r;
  r.conservative_std = conservative_std;
  for (const auto& p : pairs) {
    const AlignmentCounts c = uer_counts(p.hyp, p.ref);
    ReportCell& cell = r.cells[static_cast<std::size_t>(bucket_of(p.condition))];
    cell.counts += c;
    ++cell.num_utterances;
    r.overall.counts += c;
    ++r.overall.num_utterances;
  }
  for (auto& cell : r.cells) finish(cell, conservative_std);
  finish(r.overall, conservative_std);
  return r;
}

std::string ConditionReport::table(const std::string& row_label) const {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-24s %14s %14s %14s %14s %14s\n", "", "Clean", "Noise-H",
                "Noise-L", "Reverb", "Overall");
  out += buf;
  auto cell_text = [](const ReportCell& c) {
    return c.present() ? fmt(c.uer) + " +/- " + fmt(c.std) : std::string("-");
  };
  std::snprintf(buf, sizeof(buf), "%-24s %14s %14s %14s %14s %14s\n", row_label.c_str(),
                cell_text(cell(Bucket::kClean)).c_str(), cell_text(cell(Bucket::kNoiseH)).c_str(),
                cell_text(cell(Bucket::kNoiseL)).c_str(), cell_text(cell(Bucket::kReverb)).c_str(),
                cell_text(overall).c_str());
  out += buf;
  return out;
}

std::string ConditionReport::records() const {
  std::string out;
  auto line = [&](const std::string& name, const ReportCell& c) {
    if (!c.present()) return;
    out += name + "\t" + format_double(c.uer) + "\t" + format_double(c.std) + "\t" +
           std::to_string(c.counts.substitutions) + "\t" + std::to_string(c.counts.insertions) +
           "\t" + std::to_string(c.counts.deletions) + "\t" +
           std::to_string(c.counts.ref_length) + "\t" + std::to_string(c.num_utterances) + "\n";
  };
  for (Bucket b : kBuckets) line(bucket_name(b), cell(b));
  line("overall", overall);
  return out;
}

}  // namespace rdu::metrics
