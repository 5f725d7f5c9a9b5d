// rdu/include/rdu/ssl/pseudo_ssl.h

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

#ifndef RDU_SSL_PSEUDO_SSL_H_
#define RDU_SSL_PSEUDO_SSL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rdu/audio/waveform.h"
#include "rdu/tensor/ops.h"
#include "rdu/tensor/tape.h"

namespace rdu::ssl {

using tensor::ParameterStore;
using tensor::Tape;
using tensor::Tensor;
using tensor::Var;

// Layer 0 is the frontend projection; layers 1..L are encoder layers.
struct LayerStackFeatures {
  std::vector<Tensor> layers;
  double frame_hop_ms = 20.0;

  std::size_t num_layers() const { return layers.size(); }  // L + 1
  std::size_t num_frames() const { return layers.empty() ? 0 : layers[0].rows(); }
  std::size_t dim() const { return layers.empty() ? 0 : layers[0].cols(); }
  // Throws ShapeError on ragged layers and NumericalError on non-finite values.
  void validate() const;
};

struct PseudoEncoderConfig {
  int num_layers = 6;
  int dim = 64;
  int n_mels = 40;
  double window_ms = 25.0;
  double hop_ms = 20.0;
  int fft_size = 512;
  std::uint64_t seed = 1;

  void validate() const;
  int default_cluster_layer() const { return num_layers - 2; }
};

// Names of the adapter parameters after encoder layer i (1-based).
std::string adapter_name(int layer, const std::string& field);

// Adds zero-output adapters (down, bias_b, up, bias_d) after every layer.
// down is random; up and bias_d start at zero.
void add_adapters(ParameterStore& store, const PseudoEncoderConfig& config, int bottleneck,
                  std::uint64_t seed);
bool has_adapters(const ParameterStore& store, const PseudoEncoderConfig& config);

// Frozen residual-tanh encoder with spectrally bounded random weights.
class PseudoEncoder {
 public:
  explicit PseudoEncoder(const PseudoEncoderConfig& config);

  const PseudoEncoderConfig& config() const { return config_; }

  // T x n_mels log filterbank energies. Throws if the waveform is shorter
  // than one window.
  Tensor log_mel(const audio::Waveform& w) const;
  // Layer 0 state (normalised filterbank, affine-projected to dim).
  Tensor project(const Tensor& log_mel) const;

  // Layers 0..L as tape variables. layer0 enters as a constant; when
  // adapters is non-null its parameters are read from the tape so
  // gradients reach them. Encoder weights are always constants.
  std::vector<Var> forward_layers(Tape& tape, const Tensor& layer0,
                                  ParameterStore* adapters = nullptr) const;

  LayerStackFeatures extract(const audio::Waveform& w,
                             const ParameterStore* adapters = nullptr) const;

  const Tensor& layer_weight(int layer) const { return weights_.at(layer - 1); }
  const Tensor& mel_filters() const { return mel_; }

 private:
  std::vector<Var> forward_with(Tape& tape, const Tensor& layer0, bool with_adapters,
                                const std::function<Var(const std::string&)>& fetch) const;

  PseudoEncoderConfig config_;
  Tensor mel_;  // (fft_size/2+1) x n_mels
  Tensor proj_, proj_bias_;
  std::vector<Tensor> weights_, biases_;
};

// Convenience wrapper; builds the encoder on every call.
LayerStackFeatures extract_features(const audio::Waveform& w, const PseudoEncoderConfig& config,
                                    const ParameterStore* adapters = nullptr);

const Tensor& select_layer(const LayerStackFeatures& features, int layer_index);

// Largest singular value by power iteration.
double spectral_norm(const Tensor& w, int iterations = 200);

}  // namespace rdu::ssl

#endif  // RDU_SSL_PSEUDO_SSL_H_
