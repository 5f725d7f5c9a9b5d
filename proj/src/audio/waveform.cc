// rdu/src/audio/waveform.cc

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

#include "rdu/audio/waveform.h"

#include <algorithm>
#include <cmath>

#include "rdu/util/error.h"

namespace rdu::audio {

std::string to_string(AugType t) {
  switch (t) {
    case AugType::kClean: return "clean";
    case AugType::kReverb: return "reverb";
    case AugType::kNoise: return "noise";
  }
  return "clean";
}

AugType parse_aug_type(const std::string& s) {
  if (s == "clean") return AugType::kClean;
  if (s == "reverb") return AugType::kReverb;
  if (s == "noise") return AugType::kNoise;
  throw Error("unknown condition label '" + s + "'");
}

double rms_power(const Waveform& w, std::optional<SampleSpan> span) {
  SampleSpan s = span.value_or(SampleSpan{0, w.samples.size()});
  if (s.end > w.samples.size() || s.begin > s.end) {
    throw Error("rms_power: span [" + std::to_string(s.begin) + "," + std::to_string(s.end) +
                ") outside waveform of " + std::to_string(w.samples.size()) + " samples");
  }
  if (s.begin == s.end) throw Error("rms_power: empty span");
  double acc = 0.0;
  for (std::size_t i = s.begin; i < s.end; ++i) acc += w.samples[i] * w.samples[i];
  return acc / static_cast<double>(s.end - s.begin);
}

double peak_abs(const Waveform& w) {
  double p = 0.0;
  for (double v : w.samples) p = std::max(p, std::abs(v));
  return p;
}

std::size_t ms_to_samples(double ms, int sample_rate_hz) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate_hz / 1000.0));
}

std::size_t frame_count(std::size_t num_samples, std::size_t window, std::size_t hop) {
  if (hop == 0 || window < hop) throw Error("frame_count: need window >= hop > 0");
  if (num_samples < window) return 0;
  return 1 + (num_samples - window) / hop;
}

std::vector<std::vector<double>> frame_signal(const Waveform& w, double window_ms, double hop_ms) {
  const std::size_t window = ms_to_samples(window_ms, w.sample_rate_hz);
  const std::size_t hop = ms_to_samples(hop_ms, w.sample_rate_hz);
  const std::size_t n = frame_count(w.samples.size(), window, hop);
  std::vector<std::vector<double>> frames(n);
  for (std::size_t t = 0; t < n; ++t) {
    auto first = w.samples.begin() + static_cast<std::ptrdiff_t>(t * hop);
    frames[t].assign(first, first + static_cast<std::ptrdiff_t>(window));
  }
  return frames;
}

}  // namespace rdu::audio
