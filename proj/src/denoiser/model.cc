// rdu/src/denoiser/model.cc

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

#include "rdu/denoiser/model.h"

#include <cmath>
#include <limits>
#include <map>

#include "rdu/tensor/checkpoint.h"
#include "rdu/tensor/ops.h"
#include "rdu/util/common.h"

namespace rdu::denoiser {

namespace ops = rdu::tensor;

std::string to_string(Variant v) { return v == Variant::kAdapter ? "adapter" : "external"; }
std::string to_string(EncoderKind k) { return k == EncoderKind::kNone ? "none" : "transformer"; }

Variant parse_variant(const std::string& s) {
  if (s == "external") return Variant::kExternal;
  if (s == "adapter") return Variant::kAdapter;
  throw ConfigError("denoiser.variant: unknown value '" + s + "' (external|adapter)");
}

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "none") return EncoderKind::kNone;
  if (s == "transformer") return EncoderKind::kTransformer;
  throw ConfigError("denoiser.encoder_kind: unknown value '" + s + "' (none|transformer)");
}

void DenoiserConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& msg) {
    throw ConfigError("denoiser." + field + ": " + msg);
  };
  if (encoder_kind == EncoderKind::kTransformer && encoder_layers < 1) {
    fail("encoder_layers", "a transformer encoder needs at least one layer");
  }
  if (encoder_layers < 0) fail("encoder_layers", "must be non-negative");
  if (decoder_layers < 0) fail("decoder_layers", "must be non-negative");
  if (model_dim < 1) fail("model_dim", "must be positive");
  if (heads < 1 || model_dim % heads != 0) fail("heads", "must divide model_dim");
  if (ffn_dim < 1) fail("ffn_dim", "must be positive");
  if (!(ctc_weight >= 0.0 && ctc_weight <= 1.0)) fail("ctc_weight", "must lie in [0, 1]");
  if (decoder_layers == 0 && ctc_weight != 1.0) {
    fail("ctc_weight", "must be 1 without a decoder (pure CTC training)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout", "must lie in [0, 1)");
  if (num_units < 2) fail("num_units", "must be at least 2");
  if (adapter_bottleneck < 1) fail("adapter_bottleneck", "must be positive");
  ssl.validate();
}

std::vector<std::string> DenoiserConfig::to_header() const {
  std::vector<std::string> h;
  auto kv = [&](const std::string& k, const std::string& v) { h.push_back(k + "=" + v); };
  kv("variant", to_string(variant));
  kv("encoder_kind", to_string(encoder_kind));
  kv("encoder_layers", std::to_string(encoder_layers));
  kv("decoder_layers", std::to_string(decoder_layers));
  kv("model_dim", std::to_string(model_dim));
  kv("heads", std::to_string(heads));
  kv("ffn_dim", std::to_string(ffn_dim));
  kv("ctc_weight", format_double(ctc_weight));
  kv("dropout", format_double(dropout));
  kv("num_units", std::to_string(num_units));
  kv("adapter_bottleneck", std::to_string(adapter_bottleneck));
  kv("seed", std::to_string(seed));
  kv("ssl.num_layers", std::to_string(ssl.num_layers));
  kv("ssl.dim", std::to_string(ssl.dim));
  kv("ssl.n_mels", std::to_string(ssl.n_mels));
  kv("ssl.window_ms", format_double(ssl.window_ms));
  kv("ssl.hop_ms", format_double(ssl.hop_ms));
  kv("ssl.fft_size", std::to_string(ssl.fft_size));
  kv("ssl.seed", std::to_string(ssl.seed));
  return h;
}

DenoiserConfig DenoiserConfig::from_header(const std::vector<std::string>& lines) {
  std::map<std::string, std::string> kv;
  for (const auto& line : lines) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto get = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("checkpoint header: missing '" + k + "'");
    return it->second;
  };
  auto geti = [&](const std::string& k) { return static_cast<int>(parse_int(get(k), k)); };
  DenoiserConfig c;
  c.variant = parse_variant(get("variant"));
  c.encoder_kind = parse_encoder_kind(get("encoder_kind"));
  c.encoder_layers = geti("encoder_layers");
  c.decoder_layers = geti("decoder_layers");
  c.model_dim = geti("model_dim");
  c.heads = geti("heads");
  c.ffn_dim = geti("ffn_dim");
  c.ctc_weight = parse_double(get("ctc_weight"), "ctc_weight");
  c.dropout = parse_double(get("dropout"), "dropout");
  c.num_units = geti("num_units");
  c.adapter_bottleneck = geti("adapter_bottleneck");
  c.seed = parse_uint64(get("seed"), "seed");
  c.ssl.num_layers = geti("ssl.num_layers");
  c.ssl.dim = geti("ssl.dim");
  c.ssl.n_mels = geti("ssl.n_mels");
  c.ssl.window_ms = parse_double(get("ssl.window_ms"), "ssl.window_ms");
  c.ssl.hop_ms = parse_double(get("ssl.hop_ms"), "ssl.hop_ms");
  c.ssl.fft_size = geti("ssl.fft_size");
  c.ssl.seed = parse_uint64(get("ssl.seed"), "ssl.seed");
  c.validate();
  return c;
}

DenoiserConfig variant_config(const std::string& name, const DenoiserConfig& base) {
  DenoiserConfig c = base;
  c.variant = Variant::kExternal;
  if (name == "encoder_only") {
    c.encoder_kind = EncoderKind::kTransformer;
    c.decoder_layers = 0;
    c.ctc_weight = 1.0;
  } else if (name == "decoder_only") {
    c.encoder_kind = EncoderKind::kNone;
    c.encoder_layers = 0;
    c.ctc_weight = 0.0;
  } else if (name == "encoder_decoder") {
    c.encoder_kind = EncoderKind::kTransformer;
  } else if (name == "adapter_encoder_decoder") {
    c.encoder_kind = EncoderKind::kTransformer;
    c.variant = Variant::kAdapter;
  } else {
    throw ConfigError("ablate.variants: unknown variant '" + name + "'");
  }
  if (c.encoder_kind == EncoderKind::kTransformer && c.encoder_layers < 1) {
    c.encoder_layers = std::max(1, base.encoder_layers);
  }
  if (c.decoder_layers == 0 && name != "encoder_only") c.decoder_layers = 2;
  c.validate();
  return c;
}

Tensor positional_encoding(std::size_t rows, std::size_t dim) {
  Tensor pe = Tensor::matrix(rows, dim);
  for (std::size_t p = 0; p < rows; ++p) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -double(2 * (i / 2)) / double(dim));
      pe(p, i) = (i % 2 == 0) ? std::sin(double(p) * rate) : std::cos(double(p) * rate);
    }
  }
  return pe;
}

Var sequence_nll(const Var& log_probs, std::span<const int> targets) {
  if (targets.empty()) throw ShapeError("sequence_nll: no targets");
  return ops::scale(ops::sum(ops::pick(log_probs, targets)), -1.0 / double(targets.size()));
}

DenoiserModel::DenoiserModel(const DenoiserConfig& config) : config_(config) {
  config_.validate();
  init_params();
}

DenoiserModel::DenoiserModel(const DenoiserConfig& config, ParameterStore params)
    : DenoiserModel(config) {
  for (const auto& p : params.params()) {
    const tensor::Parameter* mine = params_.find(p.name);
    if (!mine) throw IoError("model: unexpected parameter '" + p.name + "'");
    if (mine->value.shape() != p.value.shape()) {
      throw ShapeError("model: parameter '" + p.name + "' has shape " +
                       tensor::shape_string(p.value.shape()) + ", expected " +
                       tensor::shape_string(mine->value.shape()));
    }
  }
  for (auto& p : params_.params()) {
    const tensor::Parameter* src = params.find(p.name);
    if (!src) throw IoError("model: missing parameter '" + p.name + "'");
    p.value = src->value;
  }
}

void DenoiserModel::init_params() {
  Rng rng = make_rng(config_.seed, "denoiser-init");
  const auto dm = static_cast<std::size_t>(config_.model_dim);
  const auto ff = static_cast<std::size_t>(config_.ffn_dim);
  const auto v = static_cast<std::size_t>(config_.vocab_size());
  auto normal = [&](std::size_t r, std::size_t c, double sd) {
    std::normal_distribution<double> g(0.0, sd);
    Tensor t = Tensor::matrix(r, c);
    for (double& x : t.values()) x = g(rng);
    return t;
  };
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    params_.add(name + ".w", normal(in, out, 1.0 / std::sqrt(double(in))));
    params_.add(name + ".b", Tensor(tensor::Shape{out}));
  };
  auto norm = [&](const std::string& name) {
    params_.add(name + ".g", Tensor(tensor::Shape{dm}, 1.0));
    params_.add(name + ".b", Tensor(tensor::Shape{dm}));
  };
  auto attn = [&](const std::string& name) {
    for (const char* m : {"q", "k", "v", "o"}) linear(name + "." + m, dm, dm);
  };
  auto ffn = [&](const std::string& name) {
    linear(name + ".1", dm, ff);
    linear(name + ".2", ff, dm);
  };

  params_.add("ws.logits", Tensor(tensor::Shape{static_cast<std::size_t>(config_.ssl.num_layers + 1)}));
  linear("proj", static_cast<std::size_t>(config_.ssl.dim), dm);
  if (config_.encoder_kind == EncoderKind::kTransformer) {
    for (int i = 0; i < config_.encoder_layers; ++i) {
      const std::string p = "enc." + std::to_string(i);
      norm(p + ".ln1");
      attn(p + ".self");
      norm(p + ".ln2");
      ffn(p + ".ffn");
    }
    norm("enc.ln");
  }
  if (config_.has_decoder()) {
    params_.add("dec.embed", normal(v, dm, 1.0));
    for (int i = 0; i < config_.decoder_layers; ++i) {
      const std::string p = "dec." + std::to_string(i);
      norm(p + ".ln1");
      attn(p + ".self");
      norm(p + ".ln2");
      attn(p + ".cross");
      norm(p + ".ln3");
      ffn(p + ".ffn");
    }
    norm("dec.ln");
    linear("dec.out", dm, v);
  }
  linear("ctc", dm, v);
  if (config_.variant == Variant::kAdapter) {
    ssl_encoder_ = std::make_shared<ssl::PseudoEncoder>(config_.ssl);
    ssl::add_adapters(params_, config_.ssl, config_.adapter_bottleneck, config_.seed);
  }
}

std::vector<double> DenoiserModel::layer_weights() const {
  Tape tape(false);
  return ops::softmax(tape.constant(params_.get("ws.logits").value), 0).value().values();
}

Var DenoiserModel::param(Tape& tape, const std::string& name) const {
  return tape.parameter(params_, name);
}

Var DenoiserModel::linear(Tape& tape, const std::string& prefix, const Var& x) const {
  return ops::add_row(ops::matmul(x, param(tape, prefix + ".w")), param(tape, prefix + ".b"));
}

Var DenoiserModel::norm(Tape& tape, const std::string& prefix, const Var& x) const {
  return ops::layer_norm(x, param(tape, prefix + ".g"), param(tape, prefix + ".b"));
}

Var DenoiserModel::ffn(Tape& tape, const std::string& prefix, const Var& x) const {
  return linear(tape, prefix + ".2", ops::gelu(linear(tape, prefix + ".1", x)));
}

Var DenoiserModel::attention(Tape& tape, const std::string& prefix, const Var& q_in, const Var& k,
                             const Var& v, bool causal) const {
  const Var q = linear(tape, prefix + ".q", q_in);
  const auto dh = static_cast<std::size_t>(config_.model_dim / config_.heads);
  const std::size_t lq = q.value().rows(), lk = k.value().rows();
  Var mask;
  if (causal) {
    Tensor m = Tensor::matrix(lq, lk);
    for (std::size_t i = 0; i < lq; ++i)
      for (std::size_t j = i + 1; j < lk; ++j) m(i, j) = -std::numeric_limits<double>::infinity();
    mask = tape.constant(std::move(m));
  }
  std::vector<Var> heads;
  for (int h = 0; h < config_.heads; ++h) {
    const std::size_t b = static_cast<std::size_t>(h) * dh, e = b + dh;
    Var s = ops::scale(ops::matmul(ops::slice(q, 1, b, e), ops::transpose(ops::slice(k, 1, b, e))),
                       1.0 / std::sqrt(double(dh)));
    if (causal) s = ops::add(s, mask);
    heads.push_back(ops::matmul(ops::softmax(s, 1), ops::slice(v, 1, b, e)));
  }
  Var cat = heads.size() == 1 ? heads[0] : ops::concat(heads, 1);
  return linear(tape, prefix + ".o", cat);
}

DenoiserModel::Encoded DenoiserModel::encode(Tape& tape, const ssl::LayerStackFeatures& features,
                                             bool train, Rng* rng) const {
  const auto want_layers = static_cast<std::size_t>(config_.ssl.num_layers + 1);
  if (features.num_layers() != want_layers ||
      features.dim() != static_cast<std::size_t>(config_.ssl.dim) || features.num_frames() == 0) {
    throw ShapeError("encode: features are " + std::to_string(features.num_layers()) + " layers x " +
                     std::to_string(features.num_frames()) + " x " + std::to_string(features.dim()) +
                     ", model expects " + std::to_string(want_layers) + " layers of dim " +
                     std::to_string(config_.ssl.dim));
  }
  const bool drop = train && config_.dropout > 0.0;
  if (drop && !rng) throw Error("encode: dropout needs an rng");
  auto dropout = [&](const Var& x) { return drop ? ops::dropout(x, config_.dropout, true, *rng) : x; };

  std::vector<Var> layers;
  if (config_.variant == Variant::kAdapter) {
    layers = ssl_encoder_->forward_layers(tape, features.layers[0], &params_);
  } else {
    for (const auto& l : features.layers) layers.push_back(tape.constant(l));
  }
  Var x = ops::weighted_sum(ops::softmax(param(tape, "ws.logits"), 0), layers);
  x = linear(tape, "proj", x);
  if (config_.encoder_kind == EncoderKind::kTransformer) {
    const auto t = x.value().rows();
    x = dropout(ops::add(x, tape.constant(positional_encoding(t, x.value().cols()))));
    for (int i = 0; i < config_.encoder_layers; ++i) {
      const std::string p = "enc." + std::to_string(i);
      Var h = norm(tape, p + ".ln1", x);
      Var k = linear(tape, p + ".self.k", h), v = linear(tape, p + ".self.v", h);
      x = ops::add(x, dropout(attention(tape, p + ".self", h, k, v, false)));
      h = norm(tape, p + ".ln2", x);
      x = ops::add(x, dropout(ffn(tape, p + ".ffn", h)));
    }
    x = norm(tape, "enc.ln", x);
  }
  return {x, ops::log_softmax(linear(tape, "ctc", x), 1)};
}

DenoiserModel::Memory DenoiserModel::prepare_memory(Tape& tape, const Var& states) const {
  if (!config_.has_decoder()) throw Error("decoder: model has no decoder");
  Memory m;
  for (int i = 0; i < config_.decoder_layers; ++i) {
    const std::string p = "dec." + std::to_string(i) + ".cross";
    m.keys.push_back(linear(tape, p + ".k", states));
    m.values.push_back(linear(tape, p + ".v", states));
  }
  return m;
}

Var DenoiserModel::decoder_log_probs(Tape& tape, const Memory& memory,
                                     std::span<const int> input_tokens, bool train, Rng* rng) const {
  if (!config_.has_decoder()) throw Error("decoder: model has no decoder");
  if (input_tokens.empty()) throw ShapeError("decoder: empty input");
  const bool drop = train && config_.dropout > 0.0;
  if (drop && !rng) throw Error("decoder: dropout needs an rng");
  auto dropout = [&](const Var& x) { return drop ? ops::dropout(x, config_.dropout, true, *rng) : x; };

  Var x = ops::embedding_lookup(param(tape, "dec.embed"), input_tokens);
  x = dropout(ops::add(x, tape.constant(positional_encoding(input_tokens.size(),
                                                            static_cast<std::size_t>(config_.model_dim)))));
  for (int i = 0; i < config_.decoder_layers; ++i) {
    const std::string p = "dec." + std::to_string(i);
    Var h = norm(tape, p + ".ln1", x);
    Var k = linear(tape, p + ".self.k", h), v = linear(tape, p + ".self.v", h);
    x = ops::add(x, dropout(attention(tape, p + ".self", h, k, v, true)));
    h = norm(tape, p + ".ln2", x);
    x = ops::add(x, dropout(attention(tape, p + ".cross", h, memory.keys[i], memory.values[i], false)));
    h = norm(tape, p + ".ln3", x);
    x = ops::add(x, dropout(ffn(tape, p + ".ffn", h)));
  }
  x = norm(tape, "dec.ln", x);
  return ops::log_softmax(linear(tape, "dec.out", x), 1);
}

Var DenoiserModel::decoder_ce_loss(Tape& tape, const Memory& memory, std::span<const int> target,
                                   bool train, Rng* rng) const {
  std::vector<int> in{config_.sos()}, out(target.begin(), target.end());
  in.insert(in.end(), target.begin(), target.end());
  out.push_back(config_.eos());
  return sequence_nll(decoder_log_probs(tape, memory, in, train, rng), out);
}

LossParts DenoiserModel::hybrid_loss(Tape& tape, const TrainingExample& example, bool train,
                                     Rng* rng, std::optional<double> lambda) const {
  const double lam = lambda.value_or(config_.ctc_weight);
  if (!(lam >= 0.0 && lam <= 1.0)) throw ConfigError("hybrid_loss: lambda must lie in [0, 1]");
  if (!config_.has_decoder() && lam != 1.0) {
    throw ConfigError("hybrid_loss: a model without decoder needs lambda = 1");
  }
  for (int u : example.target) {
    if (u < 0 || u >= config_.num_units) {
      throw ShapeError("hybrid_loss: target unit " + std::to_string(u) + " outside [0, " +
                       std::to_string(config_.num_units) + ")");
    }
  }
  Encoded enc = encode(tape, example.features, train, rng);
  LossParts parts;
  parts.ctc = parts.ce = std::numeric_limits<double>::quiet_NaN();
  Var ctc, ce;
  if (lam > 0.0) {
    ctc = ctc_loss(enc.ctc_log_probs, example.target, config_.blank());
    parts.ctc = ctc.value().item();
  }
  if (lam < 1.0) {
    ce = decoder_ce_loss(tape, prepare_memory(tape, enc.states), example.target, train, rng);
    parts.ce = ce.value().item();
  }
  if (lam == 1.0) parts.total = ctc;
  else if (lam == 0.0) parts.total = ce;
  else parts.total = ops::add(ops::scale(ctc, lam), ops::scale(ce, 1.0 - lam));
  return parts;
}

void DenoiserModel::save(const std::string& path) const {
  tensor::write_checkpoint(path, params_, config_.to_header());
}

DenoiserModel DenoiserModel::load(const std::string& path) {
  tensor::Checkpoint ckpt = tensor::read_checkpoint(path);
  return DenoiserModel(DenoiserConfig::from_header(ckpt.header), std::move(ckpt.params));
}

}  // namespace rdu::denoiser
