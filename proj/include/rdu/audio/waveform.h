// rdu/include/rdu/audio/waveform.h

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

#ifndef RDU_AUDIO_WAVEFORM_H_
#define RDU_AUDIO_WAVEFORM_H_

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rdu::audio {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
};

enum class AugType { kClean, kReverb, kNoise };

std::string to_string(AugType t);
AugType parse_aug_type(const std::string& s);

// Which version of a source utterance a recording is. source_tag and snr_db
// are meaningful only for noise.
struct Condition {
  AugType type = AugType::kClean;
  std::string source_tag;
  double snr_db = 0.0;

  static Condition clean() { return {}; }
  static Condition reverb() { return {AugType::kReverb, "", 0.0}; }
  static Condition noise(std::string tag, double snr) {
    return {AugType::kNoise, std::move(tag), snr};
  }
};

struct UtteranceRecord {
  std::string id;
  Waveform waveform;
  Condition condition;
};

// Half-open sample range [begin, end).
struct SampleSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Mean squared amplitude over the span (whole waveform by default).
double rms_power(const Waveform& w, std::optional<SampleSpan> span = std::nullopt);
double peak_abs(const Waveform& w);

std::size_t ms_to_samples(double ms, int sample_rate_hz = kSampleRate);

// 1 + floor((len - window) / hop) for len >= window, else 0.
std::size_t frame_count(std::size_t num_samples, std::size_t window, std::size_t hop);

// Overlapping fixed-length frames; no padding, so short inputs yield none.
std::vector<std::vector<double>> frame_signal(const Waveform& w, double window_ms, double hop_ms);

}  // namespace rdu::audio

#endif  // RDU_AUDIO_WAVEFORM_H_
