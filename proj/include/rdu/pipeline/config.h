// rdu/include/rdu/pipeline/config.h

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

#ifndef RDU_PIPELINE_CONFIG_H_
#define RDU_PIPELINE_CONFIG_H_

#include <optional>
#include <string>
#include <vector>

#include "rdu/denoiser/decode.h"
#include "rdu/denoiser/model.h"
#include "rdu/denoiser/train.h"
#include "rdu/ssl/pseudo_ssl.h"

namespace rdu::pipeline {

struct RunSection {
  std::optional<std::uint64_t> seed;  // required
  int threads = 1;
};

struct CorpusSection {
  std::string source = "synth";  // synth | manifest
  std::string manifest;          // clean manifest when source = manifest
  int num_utterances = 200;
  int num_unit_types = 8;
  int units_per_utterance = 6;
  int valid_utterances = 20;
  int test_utterances = 30;
};

struct AugmentSection {
  double snr_low_db = 0.0;
  double snr_high_db = 20.0;
  std::vector<double> test_snr_grid{5.0, 10.0, 15.0, 20.0};
  std::vector<std::string> noise_tags{"stationary", "babble", "impulsive"};
  int num_irs = 3;
  double noise_seconds = 20.0;
};

struct QuantizerSection {
  int k = 16;
  int layer_index = -1;  // -1: second-to-last encoder layer
  double subset_fraction = 0.3;
  int max_iters = 100;
  double tol = 1e-6;
  int restarts = 3;
};

struct DenoiserSection {
  std::string variant = "external";
  std::string encoder_kind = "transformer";
  int encoder_layers = 2;
  int decoder_layers = 2;
  int model_dim = 64;
  int heads = 4;
  int ffn_dim = 128;
  double ctc_weight = 0.3;
  double dropout = 0.1;
  int adapter_bottleneck = 16;
};

struct TrainSection {
  int epochs = 30;
  int batch_size = 16;
  double peak_lr = 1e-3;
  long long warmup_steps = 200;
  double decay = 0.9995;
  double clip_norm = 5.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-8;
  int valid_beam = 4;
};

struct DecodeSection {
  int beam_size = 10;
  double ctc_weight = 0.3;
  int max_len = 0;
};

struct AdaptSection {
  std::string environment = "car";
  int n_recordings = 5;
  double recording_len_s = 30.0;
  int utterances_per_recording = 100;
  double snr_low_db = 0.0;
  double snr_high_db = 20.0;
  double eval_snr_db = 10.0;
  int steps = 100;
  int batch_size = 8;
  double lr = 3e-4;
};

struct AblateSection {
  std::vector<std::string> variants{"encoder_only", "decoder_only", "encoder_decoder",
                                    "adapter_encoder_decoder"};
  int epochs = 0;  // 0: train.epochs
};

struct PipelineConfig {
  RunSection run;
  CorpusSection corpus;
  AugmentSection augment;
  ssl::PseudoEncoderConfig ssl;
  QuantizerSection quantizer;
  DenoiserSection denoiser;
  TrainSection train;
  DecodeSection decode;
  AdaptSection adapt;
  AblateSection ablate;

  // Throws ConfigError("<section>.<key>: ...").
  void validate() const;

  std::uint64_t seed() const;
  // Independent stream per purpose, derived from run.seed.
  std::uint64_t derived_seed(const std::string& purpose) const;
  int cluster_layer() const;

  // Full model configuration for a given number of units.
  ssl::PseudoEncoderConfig encoder_config() const;
  denoiser::DenoiserConfig denoiser_config() const;
  denoiser::TrainConfig train_config() const;
  denoiser::BeamConfig beam_config() const;
};

// "section.key = value" lines; '#' starts a comment. Unknown or repeated
// keys and malformed values are ConfigErrors naming the key. Keys not given
// keep their defaults.
PipelineConfig parse_config(const std::string& text, const std::string& origin = "<config>");
PipelineConfig load_config(const std::string& path);

// Every key in a fixed order; parse_config(format_config(c)) == c.
std::string format_config(const PipelineConfig& config);

// format_config restricted to keys under the given section prefixes, plus
// run.seed. Used to fingerprint what a stage depends on.
std::string config_digest(const PipelineConfig& config, const std::vector<std::string>& sections);

std::vector<std::string> config_keys();

}  // namespace rdu::pipeline

#endif  // RDU_PIPELINE_CONFIG_H_
