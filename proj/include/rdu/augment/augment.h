// rdu/include/rdu/augment/augment.h

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

#ifndef RDU_AUGMENT_AUGMENT_H_
#define RDU_AUGMENT_AUGMENT_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rdu/audio/manifest.h"
#include "rdu/audio/waveform.h"
#include "rdu/util/common.h"

namespace rdu::augment {

using audio::Waveform;

struct ImpulseResponse {
  std::vector<double> samples;
  int sample_rate_hz = audio::kSampleRate;
  std::string tag;
};

struct NoiseSource {
  std::string tag;
  Waveform waveform;
};

// Sources keyed by tag; each tag stands for one noise collection.
struct NoiseBank {
  std::vector<NoiseSource> sources;
  const NoiseSource* find(const std::string& tag) const;
  // Throws unless every source is at least 1 s long and tags are unique.
  void validate() const;
};

struct MixResult {
  Waveform mixture;
  double gain = 0.0;       // applied to the noise segment before any rescale
  bool rescaled = false;   // mixture divided by its peak to stay within [-1, 1]
  std::size_t offset = 0;  // start of the noise crop (0 when tiled)
};

// clean + g * noise_segment with g chosen so that the power ratio over the
// mixed span is exactly snr_db. Longer noise is cropped at a random offset,
// shorter noise is tiled. A mixture whose peak exceeds 1 is divided by its
// peak and flagged.
MixResult mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db, Rng& rng);

// 10 log10(P_clean / P_(mixture - clean)); +inf when the residual is zero.
double measure_snr(const Waveform& mixture, const Waveform& clean);

// Full linear convolution truncated to clean.size(), before normalisation.
std::vector<double> convolve_truncated(const std::vector<double>& clean,
                                       const std::vector<double>& ir);
// Reverberated copy with the same length and peak as the input. The IR's
// direct path sits at its argmax; synthetic IRs put it at index 0.
Waveform convolve_rir(const Waveform& clean, const ImpulseResponse& ir);

enum class RecipeKind { kTrain, kValidation, kTest };

// One clean copy (train only), one reverberated copy, and one noisy copy per
// noise tag: at a uniform random SNR in [snr_low_db, snr_high_db] (train,
// validation) or at every grid SNR (test).
struct Recipe {
  RecipeKind kind = RecipeKind::kTrain;
  double snr_low_db = 0.0;
  double snr_high_db = 20.0;
  std::vector<double> snr_grid;
  std::vector<std::string> noise_tags{"stationary", "babble", "impulsive"};
  std::uint64_t seed = 0;

  int versions_per_utterance() const;
  void validate() const;
};

Recipe train_recipe(std::uint64_t seed);
// Train recipe without the clean copy: four augmentations per sample.
Recipe validation_recipe(std::uint64_t seed);
Recipe test_recipe(std::uint64_t seed);

struct AugmentOptions {
  int threads = 1;
};

// Writes every version of every clean utterance under out_dir and returns
// the augmented manifest (wav paths relative to out_dir). Clean copies are
// byte-identical to their inputs. Output depends only on the inputs and the
// recipe seed.
std::vector<audio::ManifestEntry> augment_corpus(const std::vector<audio::ManifestEntry>& clean,
                                                 const std::string& clean_manifest_path,
                                                 const Recipe& recipe, const NoiseBank& noise_bank,
                                                 const std::vector<ImpulseResponse>& ir_bank,
                                                 const std::string& out_dir,
                                                 const AugmentOptions& options = {});

// In-memory version of one utterance's augmentation, used by
// augment_corpus and by the adaptation recipe.
struct AugmentedVersion {
  std::string id;
  Waveform waveform;
  audio::Condition condition;
  audio::AugmentationInfo info;
};
std::vector<AugmentedVersion> augment_utterance(const std::string& utt_id, const Waveform& clean,
                                                const Recipe& recipe, const NoiseBank& noise_bank,
                                                const std::vector<ImpulseResponse>& ir_bank);

// Synthetic desk-scale corpus: every utterance is a sequence of unit
// segments of 80-200 ms, each unit type having a fixed spectral signature.
struct SynthCorpus {
  std::vector<audio::UtteranceRecord> utterances;
  std::vector<std::vector<int>> scripts;  // generating unit types per utterance
};
struct SynthCorpusConfig {
  int num_utterances = 200;
  int num_unit_types = 8;
  int units_per_utterance = 6;
  std::uint64_t seed = 1;
};
SynthCorpus synth_corpus(const SynthCorpusConfig& config);
// Waveform of a single segment of the given unit type.
std::vector<double> synth_unit_segment(int unit_type, int num_unit_types, std::uint64_t corpus_seed,
                                       std::size_t length, Rng& rng);

// Stationary coloured noise, babble-like modulated harmonics and impulsive
// bursts, tagged "stationary", "babble", "impulsive".
NoiseBank synth_noise_bank(std::uint64_t seed, double duration_s = 20.0);
// Exponentially decaying IRs with T60 in [0.2, 0.8] s.
std::vector<ImpulseResponse> synth_ir_bank(std::uint64_t seed, int count = 3);

// A recording from a new acoustic environment (for test-time adaptation).
// "car" is stationary low-frequency rumble with engine harmonics; "mall" is
// non-stationary babble with clatter.
Waveform synth_environment_noise(const std::string& kind, std::uint64_t seed, double duration_s);

double sample_kurtosis(const std::vector<double>& x);

}  // namespace rdu::augment

#endif  // RDU_AUGMENT_AUGMENT_H_
