// rdu/include/rdu/denoiser/model.h

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

#ifndef RDU_DENOISER_MODEL_H_
#define RDU_DENOISER_MODEL_H_

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rdu/audio/waveform.h"
#include "rdu/denoiser/ctc.h"
#include "rdu/ssl/pseudo_ssl.h"
#include "rdu/tensor/tape.h"

namespace rdu::denoiser {

using tensor::ParameterStore;
using tensor::Tape;

enum class Variant { kExternal, kAdapter };
enum class EncoderKind { kNone, kTransformer };

std::string to_string(Variant v);
std::string to_string(EncoderKind k);
Variant parse_variant(const std::string& s);
EncoderKind parse_encoder_kind(const std::string& s);

struct DenoiserConfig {
  Variant variant = Variant::kExternal;
  EncoderKind encoder_kind = EncoderKind::kTransformer;
  int encoder_layers = 2;
  int decoder_layers = 2;
  int model_dim = 64;
  int heads = 4;
  int ffn_dim = 128;
  double ctc_weight = 0.3;  // training lambda
  double dropout = 0.1;
  int num_units = 16;       // K
  int adapter_bottleneck = 16;
  std::uint64_t seed = 1;
  // Shape of the incoming feature stack; the adapter variant also uses it
  // to rebuild the frozen encoder.
  ssl::PseudoEncoderConfig ssl;

  int vocab_size() const { return num_units + 4; }
  int blank() const { return num_units; }
  int sos() const { return num_units + 1; }
  int eos() const { return num_units + 2; }
  int pad() const { return num_units + 3; }
  bool has_decoder() const { return decoder_layers > 0; }

  // Throws ConfigError naming the offending field.
  void validate() const;
  // "key=value" lines, stored in checkpoint headers.
  std::vector<std::string> to_header() const;
  static DenoiserConfig from_header(const std::vector<std::string>& lines);
};

// Named ablation settings: encoder_only, decoder_only, encoder_decoder,
// adapter_encoder_decoder.
DenoiserConfig variant_config(const std::string& name, const DenoiserConfig& base);

struct TrainingExample {
  std::string id;
  ssl::LayerStackFeatures features;
  std::vector<int> target;  // clean deduplicated units
  audio::Condition condition;
};

struct LossParts {
  Var total;
  double ctc = 0.0;  // NaN when not computed
  double ce = 0.0;   // NaN when not computed
};

class DenoiserModel {
 public:
  explicit DenoiserModel(const DenoiserConfig& config);
  DenoiserModel(const DenoiserConfig& config, ParameterStore params);

  const DenoiserConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  std::size_t num_parameters() const { return params_.num_scalars(); }

  // Softmax of the layer logits.
  std::vector<double> layer_weights() const;

  struct Encoded {
    Var states;         // T x model_dim
    Var ctc_log_probs;  // T x vocab
  };
  // rng is only used when train is true.
  Encoded encode(Tape& tape, const ssl::LayerStackFeatures& features, bool train = false,
                 Rng* rng = nullptr) const;

  // Cross-attention keys and values, computed once per utterance.
  struct Memory {
    std::vector<Var> keys, values;
  };
  Memory prepare_memory(Tape& tape, const Var& states) const;
  // Log-probs (len x vocab) of the next token after each input prefix.
  Var decoder_log_probs(Tape& tape, const Memory& memory, std::span<const int> input_tokens,
                        bool train = false, Rng* rng = nullptr) const;

  // Mean over target positions of -log p for [sos]+target -> target+[eos].
  Var decoder_ce_loss(Tape& tape, const Memory& memory, std::span<const int> target,
                      bool train = false, Rng* rng = nullptr) const;

  // lambda * ctc + (1 - lambda) * ce; lambda defaults to the config's.
  LossParts hybrid_loss(Tape& tape, const TrainingExample& example, bool train = false,
                        Rng* rng = nullptr, std::optional<double> lambda = std::nullopt) const;

  void save(const std::string& path) const;
  static DenoiserModel load(const std::string& path);

 private:
  void init_params();
  Var param(Tape& tape, const std::string& name) const;
  Var attention(Tape& tape, const std::string& prefix, const Var& q_in, const Var& k,
                const Var& v, bool causal) const;
  Var ffn(Tape& tape, const std::string& prefix, const Var& x) const;
  Var linear(Tape& tape, const std::string& prefix, const Var& x) const;
  Var norm(Tape& tape, const std::string& prefix, const Var& x) const;

  DenoiserConfig config_;
  mutable ParameterStore params_;
  std::shared_ptr<const ssl::PseudoEncoder> ssl_encoder_;  // adapter variant only
};

// Sinusoidal position table, rows x dim.
Tensor positional_encoding(std::size_t rows, std::size_t dim);

// Mean -log p over rows, picking targets[i] from row i of log_probs.
Var sequence_nll(const Var& log_probs, std::span<const int> targets);

}  // namespace rdu::denoiser

#endif  // RDU_DENOISER_MODEL_H_
