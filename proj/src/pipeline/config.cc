// rdu/src/pipeline/config.cc

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

#include "rdu/pipeline/config.h"

#include <functional>
#include <map>
#include <set>

#include "rdu/util/common.h"

namespace rdu::pipeline {

namespace {

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

[[noreturn]] void bad(const std::string& key, const std::string& msg) {
  throw ConfigError(key + ": " + msg);
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return parse_int(v, key);
  } catch (const Error&) {
    bad(key, "expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v, key);
  } catch (const Error&) {
    bad(key, "expected a number, got '" + v + "'");
  }
}

std::vector<std::string> to_list(const std::string& v) {
  std::vector<std::string> out;
  for (const auto& p : split(v, ',')) {
    std::string t = trim(p);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

#define RDU_INT(key, member)                                                              \
  Field{key, [](const PipelineConfig& c) { return std::to_string(c.member); },            \
        [](PipelineConfig& c, const std::string& v) {                                     \
          c.member = static_cast<decltype(c.member)>(to_int(key, v));                     \
        }}
#define RDU_DOUBLE(key, member)                                                           \
  Field{key, [](const PipelineConfig& c) { return format_double(c.member); },             \
        [](PipelineConfig& c, const std::string& v) { c.member = to_double(key, v); }}
#define RDU_STRING(key, member)                                                           \
  Field{key, [](const PipelineConfig& c) { return c.member; },                            \
        [](PipelineConfig& c, const std::string& v) { c.member = v; }}
#define RDU_LIST(key, member)                                                             \
  Field{key, [](const PipelineConfig& c) { return join(c.member); },                      \
        [](PipelineConfig& c, const std::string& v) { c.member = to_list(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = {
      Field{"run.seed",
            [](const PipelineConfig& c) { return c.run.seed ? std::to_string(*c.run.seed) : ""; },
            [](PipelineConfig& c, const std::string& v) {
              try {
                c.run.seed = parse_uint64(v, "run.seed");
              } catch (const Error&) {
                bad("run.seed", "expected a non-negative integer, got '" + v + "'");
              }
            }},
      RDU_INT("run.threads", run.threads),

      RDU_STRING("corpus.source", corpus.source),
      RDU_STRING("corpus.manifest", corpus.manifest),
      RDU_INT("corpus.num_utterances", corpus.num_utterances),
      RDU_INT("corpus.num_unit_types", corpus.num_unit_types),
      RDU_INT("corpus.units_per_utterance", corpus.units_per_utterance),
      RDU_INT("corpus.valid_utterances", corpus.valid_utterances),
      RDU_INT("corpus.test_utterances", corpus.test_utterances),

      RDU_DOUBLE("augment.snr_low_db", augment.snr_low_db),
      RDU_DOUBLE("augment.snr_high_db", augment.snr_high_db),
      Field{"augment.test_snr_grid",
            [](const PipelineConfig& c) {
              std::vector<std::string> s;
              for (double v : c.augment.test_snr_grid) s.push_back(format_double(v));
              return join(s);
            },
            [](PipelineConfig& c, const std::string& v) {
              c.augment.test_snr_grid.clear();
              for (const auto& s : to_list(v)) c.augment.test_snr_grid.push_back(to_double("augment.test_snr_grid", s));
            }},
      RDU_LIST("augment.noise_tags", augment.noise_tags),
      RDU_INT("augment.num_irs", augment.num_irs),
      RDU_DOUBLE("augment.noise_seconds", augment.noise_seconds),

      RDU_INT("ssl.num_layers", ssl.num_layers),
      RDU_INT("ssl.dim", ssl.dim),
      RDU_INT("ssl.n_mels", ssl.n_mels),
      RDU_DOUBLE("ssl.window_ms", ssl.window_ms),
      RDU_DOUBLE("ssl.hop_ms", ssl.hop_ms),
      RDU_INT("ssl.fft_size", ssl.fft_size),

      RDU_INT("quantizer.k", quantizer.k),
      RDU_INT("quantizer.layer_index", quantizer.layer_index),
      RDU_DOUBLE("quantizer.subset_fraction", quantizer.subset_fraction),
      RDU_INT("quantizer.max_iters", quantizer.max_iters),
      RDU_DOUBLE("quantizer.tol", quantizer.tol),
      RDU_INT("quantizer.restarts", quantizer.restarts),

      RDU_STRING("denoiser.variant", denoiser.variant),
      RDU_STRING("denoiser.encoder_kind", denoiser.encoder_kind),
      RDU_INT("denoiser.encoder_layers", denoiser.encoder_layers),
      RDU_INT("denoiser.decoder_layers", denoiser.decoder_layers),
      RDU_INT("denoiser.model_dim", denoiser.model_dim),
      RDU_INT("denoiser.heads", denoiser.heads),
      RDU_INT("denoiser.ffn_dim", denoiser.ffn_dim),
      RDU_DOUBLE("denoiser.ctc_weight", denoiser.ctc_weight),
      RDU_DOUBLE("denoiser.dropout", denoiser.dropout),
      RDU_INT("denoiser.adapter_bottleneck", denoiser.adapter_bottleneck),

      RDU_INT("train.epochs", train.epochs),
      RDU_INT("train.batch_size", train.batch_size),
      RDU_DOUBLE("train.peak_lr", train.peak_lr),
      RDU_INT("train.warmup_steps", train.warmup_steps),
      RDU_DOUBLE("train.decay", train.decay),
      RDU_DOUBLE("train.clip_norm", train.clip_norm),
      RDU_DOUBLE("train.adam_beta1", train.adam_beta1),
      RDU_DOUBLE("train.adam_beta2", train.adam_beta2),
      RDU_DOUBLE("train.adam_eps", train.adam_eps),
      RDU_INT("train.valid_beam", train.valid_beam),

      RDU_INT("decode.beam_size", decode.beam_size),
      RDU_DOUBLE("decode.ctc_weight", decode.ctc_weight),
      RDU_INT("decode.max_len", decode.max_len),

      RDU_STRING("adapt.environment", adapt.environment),
      RDU_INT("adapt.n_recordings", adapt.n_recordings),
      RDU_DOUBLE("adapt.recording_len_s", adapt.recording_len_s),
      RDU_INT("adapt.utterances_per_recording", adapt.utterances_per_recording),
      RDU_DOUBLE("adapt.snr_low_db", adapt.snr_low_db),
      RDU_DOUBLE("adapt.snr_high_db", adapt.snr_high_db),
      RDU_DOUBLE("adapt.eval_snr_db", adapt.eval_snr_db),
      RDU_INT("adapt.steps", adapt.steps),
      RDU_INT("adapt.batch_size", adapt.batch_size),
      RDU_DOUBLE("adapt.lr", adapt.lr),

      RDU_LIST("ablate.variants", ablate.variants),
      RDU_INT("ablate.epochs", ablate.epochs),
  };
  return f;
}

#undef RDU_INT
#undef RDU_DOUBLE
#undef RDU_STRING
#undef RDU_LIST

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) bad(key, msg);
}

}  // namespace

void PipelineConfig::validate() const {
  require(run.seed.has_value(), "run.seed", "required (or pass --seed-override)");
  require(run.threads >= 1, "run.threads", "must be at least 1");

  require(corpus.source == "synth" || corpus.source == "manifest", "corpus.source",
          "must be synth or manifest");
  require(corpus.source != "manifest" || !corpus.manifest.empty(), "corpus.manifest",
          "required when corpus.source = manifest");
  require(corpus.num_utterances >= 0, "corpus.num_utterances", "must be non-negative");
  require(corpus.num_unit_types >= 2, "corpus.num_unit_types", "must be at least 2");
  require(corpus.units_per_utterance >= 1, "corpus.units_per_utterance", "must be positive");
  require(corpus.valid_utterances >= 1, "corpus.valid_utterances", "must be positive");
  require(corpus.test_utterances >= 1, "corpus.test_utterances", "must be positive");
  if (corpus.source == "synth") {
    require(corpus.valid_utterances + corpus.test_utterances < corpus.num_utterances,
            "corpus.num_utterances", "must exceed valid_utterances + test_utterances");
  }

  require(augment.snr_low_db < augment.snr_high_db, "augment.snr_low_db",
          "must be below augment.snr_high_db");
  require(!augment.test_snr_grid.empty(), "augment.test_snr_grid", "must not be empty");
  require(!augment.noise_tags.empty(), "augment.noise_tags", "must not be empty");
  {
    std::set<std::string> known{"stationary", "babble", "impulsive"};
    std::set<std::string> seen;
    for (const auto& t : augment.noise_tags) {
      require(known.count(t) > 0, "augment.noise_tags", "unknown tag '" + t + "'");
      require(seen.insert(t).second, "augment.noise_tags", "duplicate tag '" + t + "'");
    }
  }
  require(augment.num_irs >= 1, "augment.num_irs", "must be positive");
  require(augment.noise_seconds >= 1.0, "augment.noise_seconds", "must be at least 1");

  ssl.validate();

  require(quantizer.k >= 2, "quantizer.k", "must be at least 2");
  require(quantizer.layer_index >= -1 && quantizer.layer_index <= ssl.num_layers,
          "quantizer.layer_index", "must be -1 or in [0, ssl.num_layers]");
  require(quantizer.subset_fraction > 0.0 && quantizer.subset_fraction <= 1.0,
          "quantizer.subset_fraction", "must lie in (0, 1]");
  require(quantizer.max_iters >= 1, "quantizer.max_iters", "must be positive");
  require(quantizer.tol >= 0.0, "quantizer.tol", "must be non-negative");
  require(quantizer.restarts >= 1, "quantizer.restarts", "must be positive");

  denoiser_config().validate();

  require(train.epochs >= 0, "train.epochs", "must be non-negative");
  require(train.batch_size >= 1, "train.batch_size", "must be positive");
  require(train.peak_lr > 0.0, "train.peak_lr", "must be positive");
  require(train.warmup_steps >= 0, "train.warmup_steps", "must be non-negative");
  require(train.decay > 0.0 && train.decay <= 1.0, "train.decay", "must lie in (0, 1]");
  require(train.clip_norm > 0.0, "train.clip_norm", "must be positive");
  require(train.adam_beta1 >= 0.0 && train.adam_beta1 < 1.0, "train.adam_beta1", "must lie in [0, 1)");
  require(train.adam_beta2 >= 0.0 && train.adam_beta2 < 1.0, "train.adam_beta2", "must lie in [0, 1)");
  require(train.adam_eps > 0.0, "train.adam_eps", "must be positive");
  require(train.valid_beam >= 1, "train.valid_beam", "must be positive");

  require(decode.beam_size >= 1, "decode.beam_size", "must be positive");
  require(decode.ctc_weight >= 0.0 && decode.ctc_weight <= 1.0, "decode.ctc_weight",
          "must lie in [0, 1]");
  require(decode.max_len >= 0, "decode.max_len", "must be non-negative");

  require(adapt.environment == "car" || adapt.environment == "mall", "adapt.environment",
          "must be car or mall");
  require(adapt.n_recordings >= 1 && adapt.n_recordings <= 5, "adapt.n_recordings",
          "must lie in [1, 5]");
  require(adapt.recording_len_s >= 1.0, "adapt.recording_len_s", "must be at least 1");
  require(adapt.utterances_per_recording >= 1, "adapt.utterances_per_recording", "must be positive");
  require(adapt.snr_low_db < adapt.snr_high_db, "adapt.snr_low_db", "must be below adapt.snr_high_db");
  require(adapt.steps >= 0, "adapt.steps", "must be non-negative");
  require(adapt.batch_size >= 1, "adapt.batch_size", "must be positive");
  require(adapt.lr > 0.0, "adapt.lr", "must be positive");

  require(!ablate.variants.empty(), "ablate.variants", "must not be empty");
  for (const auto& v : ablate.variants) {
    try {
      denoiser::variant_config(v, denoiser_config());
    } catch (const ConfigError& e) {
      bad("ablate.variants", e.what());
    }
  }
  require(ablate.epochs >= 0, "ablate.epochs", "must be non-negative");
}

std::uint64_t PipelineConfig::seed() const {
  if (!run.seed) throw ConfigError("run.seed: required (or pass --seed-override)");
  return *run.seed;
}

std::uint64_t PipelineConfig::derived_seed(const std::string& purpose) const {
  return fnv1a64(purpose, seed());
}

int PipelineConfig::cluster_layer() const {
  return quantizer.layer_index >= 0 ? quantizer.layer_index : ssl.default_cluster_layer();
}

ssl::PseudoEncoderConfig PipelineConfig::encoder_config() const {
  ssl::PseudoEncoderConfig c = ssl;
  c.seed = run.seed ? derived_seed("ssl") : ssl.seed;
  return c;
}

denoiser::DenoiserConfig PipelineConfig::denoiser_config() const {
  denoiser::DenoiserConfig c;
  c.variant = denoiser::parse_variant(denoiser.variant);
  c.encoder_kind = denoiser::parse_encoder_kind(denoiser.encoder_kind);
  c.encoder_layers = denoiser.encoder_layers;
  c.decoder_layers = denoiser.decoder_layers;
  c.model_dim = denoiser.model_dim;
  c.heads = denoiser.heads;
  c.ffn_dim = denoiser.ffn_dim;
  c.ctc_weight = denoiser.ctc_weight;
  c.dropout = denoiser.dropout;
  c.num_units = quantizer.k;
  c.adapter_bottleneck = denoiser.adapter_bottleneck;
  c.seed = run.seed ? derived_seed("denoiser") : 1;
  c.ssl = encoder_config();
  return c;
}

denoiser::TrainConfig PipelineConfig::train_config() const {
  denoiser::TrainConfig t;
  t.epochs = train.epochs;
  t.batch_size = train.batch_size;
  t.schedule.peak_lr = train.peak_lr;
  t.schedule.warmup_steps = train.warmup_steps;
  t.schedule.decay = train.decay;
  t.adam.beta1 = train.adam_beta1;
  t.adam.beta2 = train.adam_beta2;
  t.adam.eps = train.adam_eps;
  t.clip_norm = train.clip_norm;
  t.seed = derived_seed("train");
  t.valid_beam = {train.valid_beam, decode.ctc_weight, decode.max_len};
  t.threads = run.threads;
  return t;
}

denoiser::BeamConfig PipelineConfig::beam_config() const {
  return {decode.beam_size, decode.ctc_weight, decode.max_len};
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
  std::map<std::string, const Field*> by_key;
  for (const auto& f : fields()) by_key[f.key] = &f;
  PipelineConfig c;
  std::set<std::string> seen;
  const auto lines = split(text, '\n');
  for (std::size_t n = 0; n < lines.size(); ++n) {
    std::string line = lines[n];
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(n + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'section.key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = by_key.find(key);
    if (it == by_key.end()) throw ConfigError(where + ": " + key + ": unknown key");
    if (!seen.insert(key).second) throw ConfigError(where + ": " + key + ": given twice");
    it->second->set(c, value);
  }
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(text, path);
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    const std::string s = f.key.substr(0, f.key.find('.'));
    if (s != section) {
      if (!section.empty()) out += "\n";
      section = s;
    }
    const std::string v = f.get(config);
    if (f.key == "run.seed" && v.empty()) continue;
    out += f.key + " = " + v + "\n";
  }
  return out;
}

std::string config_digest(const PipelineConfig& config, const std::vector<std::string>& sections) {
  std::string out;
  for (const auto& f : fields()) {
    bool keep = f.key == "run.seed";
    for (const auto& s : sections) keep |= f.key.rfind(s + ".", 0) == 0;
    if (keep) out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& f : fields()) k.push_back(f.key);
  return k;
}

}  // namespace rdu::pipeline
