// rdu/src/ssl/pseudo_ssl.cc

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

#include "rdu/ssl/pseudo_ssl.h"

#include <cmath>
#include <complex>

#include "rdu/util/common.h"
#include "rdu/util/error.h"
#include "rdu/util/fft.h"

namespace rdu::ssl {

namespace {

constexpr double kLogFloor = 1e-10;
// Fixed affine normalisation of the log energies (roughly [-14, 6] -> [-2, 2]).
constexpr double kLogOffset = 4.0;
constexpr double kLogScale = 0.2;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  std::normal_distribution<double> g(0.0, stddev);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.values()) v = g(rng);
  return t;
}

}  // namespace

void LayerStackFeatures::validate() const {
  if (layers.empty()) throw ShapeError("LayerStackFeatures: no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Tensor& l = layers[i];
    if (l.rank() != 2 || l.rows() != num_frames() || l.cols() != dim()) {
      throw ShapeError("LayerStackFeatures: layer " + std::to_string(i) + " has shape " +
                       tensor::shape_string(l.shape()) + ", expected " +
                       std::to_string(num_frames()) + "x" + std::to_string(dim()));
    }
    if (!l.all_finite()) {
      throw NumericalError("LayerStackFeatures: layer " + std::to_string(i) + " is not finite");
    }
  }
}

void PseudoEncoderConfig::validate() const {
  if (num_layers < 2) throw ConfigError("ssl.num_layers: must be at least 2");
  if (dim < 8) throw ConfigError("ssl.dim: must be at least 8");
  if (n_mels < 1) throw ConfigError("ssl.n_mels: must be positive");
  if (!(hop_ms > 0.0) || window_ms < hop_ms) throw ConfigError("ssl.hop_ms: need 0 < hop <= window");
  if (fft_size < 1 || static_cast<std::size_t>(fft_size) < audio::ms_to_samples(window_ms)) {
    throw ConfigError("ssl.fft_size: shorter than the analysis window");
  }
}

std::string adapter_name(int layer, const std::string& field) {
  return "adapter." + std::to_string(layer) + "." + field;
}

void add_adapters(ParameterStore& store, const PseudoEncoderConfig& config, int bottleneck,
                  std::uint64_t seed) {
  if (bottleneck < 1) throw ConfigError("adapter.bottleneck: must be positive");
  const auto d = static_cast<std::size_t>(config.dim);
  const auto b = static_cast<std::size_t>(bottleneck);
  for (int i = 1; i <= config.num_layers; ++i) {
    Rng rng = make_rng(seed, adapter_name(i, "down"));
    store.add(adapter_name(i, "down"), gaussian(d, b, 1.0 / std::sqrt(double(d)), rng));
    store.add(adapter_name(i, "bias_b"), Tensor(tensor::Shape{b}));
    store.add(adapter_name(i, "up"), Tensor::matrix(b, d));
    store.add(adapter_name(i, "bias_d"), Tensor(tensor::Shape{d}));
  }
}

bool has_adapters(const ParameterStore& store, const PseudoEncoderConfig& config) {
  for (int i = 1; i <= config.num_layers; ++i) {
    if (!store.contains(adapter_name(i, "down"))) return false;
  }
  return true;
}

double spectral_norm(const Tensor& w, int iterations) {
  if (w.rank() != 2 || w.empty()) throw ShapeError("spectral_norm: expected a nonempty matrix");
  std::vector<double> v(w.cols(), 1.0 / std::sqrt(double(w.cols())));
  std::vector<double> u(w.rows());
  double sigma = 0.0;
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t r = 0; r < w.rows(); ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * v[c];
      u[r] = acc;
    }
    double nu = 0.0;
    for (double x : u) nu += x * x;
    nu = std::sqrt(nu);
    if (nu == 0.0) return 0.0;
    for (double& x : u) x /= nu;
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t r = 0; r < w.rows(); ++r)
      for (std::size_t c = 0; c < w.cols(); ++c) v[c] += w(r, c) * u[r];
    double nv = 0.0;
    for (double x : v) nv += x * x;
    sigma = std::sqrt(nv);
    if (sigma == 0.0) return 0.0;
    for (double& x : v) x /= sigma;
  }
  return sigma;
}

PseudoEncoder::PseudoEncoder(const PseudoEncoderConfig& config) : config_(config) {
  config_.validate();
  const auto bins = static_cast<std::size_t>(config_.fft_size / 2 + 1);
  const auto m = static_cast<std::size_t>(config_.n_mels);
  const auto d = static_cast<std::size_t>(config_.dim);

  // Triangular filters equally spaced on the mel scale up to Nyquist.
  mel_ = Tensor::matrix(bins, m);
  const double top = hz_to_mel(audio::kSampleRate / 2.0);
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = mel_to_hz(top * double(i) / double(m + 1));
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = double(k) * audio::kSampleRate / config_.fft_size;
    for (std::size_t j = 0; j < m; ++j) {
      const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
      double w = 0.0;
      if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
      mel_(k, j) = w;
    }
  }

  Rng rng = make_rng(config_.seed, "pseudo-ssl");
  proj_ = gaussian(m, d, 1.0 / std::sqrt(double(m)), rng);
  proj_bias_ = gaussian(1, d, 0.1, rng).reshaped({d});
  for (int i = 0; i < config_.num_layers; ++i) {
    Tensor w = gaussian(d, d, 1.0 / std::sqrt(double(d)), rng);
    const double s = spectral_norm(w);
    for (double& v : w.values()) v *= 0.9 / s;
    weights_.push_back(std::move(w));
    biases_.push_back(gaussian(1, d, 0.1, rng).reshaped({d}));
  }
}

Tensor PseudoEncoder::log_mel(const audio::Waveform& w) const {
  const std::size_t window = audio::ms_to_samples(config_.window_ms, w.sample_rate_hz);
  const std::size_t hop = audio::ms_to_samples(config_.hop_ms, w.sample_rate_hz);
  const std::size_t t_frames = audio::frame_count(w.size(), window, hop);
  if (t_frames == 0) {
    throw Error("extract_features: waveform of " + std::to_string(w.size()) +
                " samples yields no frames");
  }
  std::vector<double> hann(window);
  for (std::size_t i = 0; i < window; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(i) / double(window));
  }
  RealFft fft(static_cast<std::size_t>(config_.fft_size));
  const std::size_t bins = mel_.rows();
  Tensor power = Tensor::matrix(t_frames, bins);
  std::vector<double> frame(window);
  for (std::size_t t = 0; t < t_frames; ++t) {
    for (std::size_t i = 0; i < window; ++i) frame[i] = w.samples[t * hop + i] * hann[i];
    auto spec = fft.forward(frame);
    for (std::size_t k = 0; k < bins; ++k) power(t, k) = std::norm(spec[k]);
  }
  Tensor out = Tensor::matrix(t_frames, mel_.cols());
  tensor::gemm_nn(power, mel_, out, false);
  for (double& v : out.values()) v = std::log(std::max(v, kLogFloor));
  return out;
}

Tensor PseudoEncoder::project(const Tensor& log_mel) const {
  if (log_mel.rank() != 2 || log_mel.cols() != mel_.cols()) {
    throw ShapeError("project: expected T x " + std::to_string(mel_.cols()) + " input, got " +
                     tensor::shape_string(log_mel.shape()));
  }
  Tensor norm = log_mel;
  for (double& v : norm.values()) v = (v + kLogOffset) * kLogScale;
  Tensor out = Tensor::matrix(norm.rows(), proj_.cols());
  tensor::gemm_nn(norm, proj_, out, false);
  for (std::size_t t = 0; t < out.rows(); ++t)
    for (std::size_t c = 0; c < out.cols(); ++c) out(t, c) += proj_bias_[c];
  return out;
}

std::vector<Var> PseudoEncoder::forward_with(
    Tape& tape, const Tensor& layer0, bool with_adapters,
    const std::function<Var(const std::string&)>& fetch) const {
  if (layer0.rank() != 2 || layer0.cols() != static_cast<std::size_t>(config_.dim)) {
    throw ShapeError("forward_layers: layer 0 has shape " + tensor::shape_string(layer0.shape()));
  }
  std::vector<Var> states;
  states.push_back(tape.constant(layer0));
  Var x = states.back();
  for (int i = 1; i <= config_.num_layers; ++i) {
    Var w = tape.constant(weights_[i - 1]);
    Var b = tape.constant(biases_[i - 1]);
    x = tensor::add(x, tensor::tanh(tensor::add_row(tensor::matmul(x, w), b)));
    if (with_adapters) {
      Var h = tensor::gelu(tensor::add_row(tensor::matmul(x, fetch(adapter_name(i, "down"))),
                                           fetch(adapter_name(i, "bias_b"))));
      x = tensor::add(x, tensor::add_row(tensor::matmul(h, fetch(adapter_name(i, "up"))),
                                         fetch(adapter_name(i, "bias_d"))));
    }
    states.push_back(x);
  }
  return states;
}

std::vector<Var> PseudoEncoder::forward_layers(Tape& tape, const Tensor& layer0,
                                               ParameterStore* adapters) const {
  if (adapters && !has_adapters(*adapters, config_)) {
    throw Error("forward_layers: parameter store lacks adapters for every layer");
  }
  return forward_with(tape, layer0, adapters != nullptr,
                      [&](const std::string& name) { return tape.parameter(*adapters, name); });
}

LayerStackFeatures PseudoEncoder::extract(const audio::Waveform& w,
                                          const ParameterStore* adapters) const {
  if (adapters && !has_adapters(*adapters, config_)) {
    throw Error("extract_features: parameter store lacks adapters for every layer");
  }
  Tape tape(false);
  auto states = forward_with(tape, project(log_mel(w)), adapters != nullptr,
                             [&](const std::string& name) {
                               return tape.constant(adapters->get(name).value);
                             });
  LayerStackFeatures out;
  out.frame_hop_ms = config_.hop_ms;
  for (const Var& v : states) out.layers.push_back(v.value());
  return out;
}

LayerStackFeatures extract_features(const audio::Waveform& w, const PseudoEncoderConfig& config,
                                    const ParameterStore* adapters) {
  return PseudoEncoder(config).extract(w, adapters);
}

const Tensor& select_layer(const LayerStackFeatures& features, int layer_index) {
  if (layer_index < 0 || static_cast<std::size_t>(layer_index) >= features.num_layers()) {
    throw Error("select_layer: index " + std::to_string(layer_index) + " outside [0, " +
                std::to_string(int(features.num_layers()) - 1) + "]");
  }
  return features.layers[static_cast<std::size_t>(layer_index)];
}

}  // namespace rdu::ssl
