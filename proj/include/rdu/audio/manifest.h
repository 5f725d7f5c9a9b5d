// rdu/include/rdu/audio/manifest.h

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

#ifndef RDU_AUDIO_MANIFEST_H_
#define RDU_AUDIO_MANIFEST_H_

#include <optional>
#include <string>
#include <vector>

#include "rdu/audio/waveform.h"

namespace rdu::audio {

// Provenance columns written by augmentation.
struct AugmentationInfo {
  std::string source_utt_id;
  AugType aug_type = AugType::kClean;
  std::string noise_tag;          // empty unless noise
  std::optional<double> snr_db;   // set iff noise
  std::string ir_tag;             // empty unless reverb
  bool rescaled = false;          // mixture was divided by its peak
};

struct ManifestEntry {
  std::string id;
  std::string wav_path;  // relative paths resolve against the manifest's directory
  Condition condition;
  std::optional<AugmentationInfo> aug;
};

// Line format:
//   id<TAB>wav_path<TAB>condition<TAB>snr_db_or_dash
// with condition one of clean | reverb | noise:<source_tag>. Augmented
// manifests append
//   <TAB>source_utt_id<TAB>aug_type<TAB>noise_tag<TAB>snr_db<TAB>ir_tag<TAB>rescaled_flag
// using '-' for absent values.
std::string format_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& origin);

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::string& path);

std::string resolve_path(const std::string& manifest_path, const std::string& wav_path);

}  // namespace rdu::audio

#endif  // RDU_AUDIO_MANIFEST_H_
