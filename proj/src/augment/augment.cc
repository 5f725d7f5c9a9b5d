// rdu/src/augment/augment.cc

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

#include "rdu/augment/augment.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "rdu/audio/wav.h"
#include "rdu/util/error.h"
#include "rdu/util/fft.h"

namespace rdu::augment {

const NoiseSource* NoiseBank::find(const std::string& tag) const {
  for (const auto& s : sources)
    if (s.tag == tag) return &s;
  return nullptr;
}

void NoiseBank::validate() const {
  std::set<std::string> tags;
  for (const auto& s : sources) {
    if (!tags.insert(s.tag).second) throw Error("noise bank: duplicate tag '" + s.tag + "'");
    if (s.waveform.duration_s() < 1.0) {
      throw Error("noise bank: source '" + s.tag + "' is shorter than 1 s");
    }
  }
}

MixResult mix_at_snr(const Waveform& clean, const Waveform& noise, double snr_db, Rng& rng) {
  if (clean.samples.empty()) throw Error("mix_at_snr: empty clean waveform");
  if (noise.samples.empty()) throw Error("mix_at_snr: empty noise waveform");
  const std::size_t n = clean.size();
  MixResult result;
  Waveform segment;
  segment.samples.resize(n);
  if (noise.size() >= n) {
    std::uniform_int_distribution<std::size_t> pick(0, noise.size() - n);
    result.offset = pick(rng);
    std::copy_n(noise.samples.begin() + static_cast<std::ptrdiff_t>(result.offset), n,
                segment.samples.begin());
  } else {
    for (std::size_t i = 0; i < n; ++i) segment.samples[i] = noise.samples[i % noise.size()];
  }
  const double p_clean = audio::rms_power(clean);
  const double p_noise = audio::rms_power(segment);
  if (p_clean <= 0.0) throw Error("mix_at_snr: clean waveform has zero power");
  if (p_noise <= 0.0) throw Error("mix_at_snr: noise segment has zero power");
  result.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  result.mixture.sample_rate_hz = clean.sample_rate_hz;
  result.mixture.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.mixture.samples[i] = clean.samples[i] + result.gain * segment.samples[i];
  }
  const double peak = audio::peak_abs(result.mixture);
  if (peak > 1.0) {
    for (double& v : result.mixture.samples) v /= peak;
    result.rescaled = true;
  }
  return result;
}

double measure_snr(const Waveform& mixture, const Waveform& clean) {
  if (mixture.size() != clean.size()) {
    throw Error("measure_snr: length mismatch (" + std::to_string(mixture.size()) + " vs " +
                std::to_string(clean.size()) + ")");
  }
  if (clean.samples.empty()) throw Error("measure_snr: empty input");
  double residual = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = mixture.samples[i] - clean.samples[i];
    residual += d * d;
  }
  if (residual == 0.0) return std::numeric_limits<double>::infinity();
  residual /= static_cast<double>(clean.size());
  return 10.0 * std::log10(audio::rms_power(clean) / residual);
}

std::vector<double> convolve_truncated(const std::vector<double>& clean,
                                       const std::vector<double>& ir) {
  if (clean.empty() || ir.empty()) throw Error("convolve_rir: empty input");
  const std::size_t n = clean.size();
  std::vector<double> out(n, 0.0);
  // Direct sum for short filters, FFT otherwise.
  if (ir.size() <= 64) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      const std::size_t kmax = std::min(ir.size(), i + 1);
      for (std::size_t k = 0; k < kmax; ++k) acc += ir[k] * clean[i - k];
      out[i] = acc;
    }
    return out;
  }
  auto full = fft_convolve(clean, std::span<const double>(ir.data(), std::min(ir.size(), n)));
  std::copy_n(full.begin(), n, out.begin());
  return out;
}

Waveform convolve_rir(const Waveform& clean, const ImpulseResponse& ir) {
  if (ir.sample_rate_hz != clean.sample_rate_hz) {
    throw Error("convolve_rir: sample rate mismatch (" + std::to_string(ir.sample_rate_hz) +
                " vs " + std::to_string(clean.sample_rate_hz) + ")");
  }
  Waveform out;
  out.sample_rate_hz = clean.sample_rate_hz;
  out.samples = convolve_truncated(clean.samples, ir.samples);
  const double target = audio::peak_abs(clean);
  const double peak = audio::peak_abs(out);
  if (peak > 0.0 && target > 0.0) {
    const double s = target / peak;
    for (double& v : out.samples) v *= s;
  }
  return out;
}

int Recipe::versions_per_utterance() const {
  const int per_tag = kind == RecipeKind::kTest ? static_cast<int>(snr_grid.size()) : 1;
  return (kind == RecipeKind::kTest || kind == RecipeKind::kTrain ? 1 : 0) + 1 +
         per_tag * static_cast<int>(noise_tags.size());
}

void Recipe::validate() const {
  if (kind == RecipeKind::kTest) {
    if (snr_grid.empty()) throw ConfigError("recipe.snr_grid: must not be empty for a test recipe");
  } else if (!(snr_low_db < snr_high_db)) {
    throw ConfigError("recipe.snr_low_db: must be below snr_high_db");
  }
  if (noise_tags.empty()) throw ConfigError("recipe.noise_tags: must not be empty");
}

Recipe train_recipe(std::uint64_t seed) {
  Recipe r;
  r.kind = RecipeKind::kTrain;
  r.seed = seed;
  return r;
}

Recipe validation_recipe(std::uint64_t seed) {
  Recipe r = train_recipe(seed);
  r.kind = RecipeKind::kValidation;
  return r;
}

Recipe test_recipe(std::uint64_t seed) {
  Recipe r;
  r.kind = RecipeKind::kTest;
  r.snr_grid = {5.0, 10.0, 15.0, 20.0};
  r.seed = seed;
  return r;
}

namespace {

std::string snr_suffix(double snr) {
  const long long v = std::llround(snr);
  std::string s = std::to_string(v);
  if (s.size() < 2) s = "0" + s;
  return "snr" + s;
}

}  // namespace

std::vector<AugmentedVersion> augment_utterance(const std::string& utt_id, const Waveform& clean,
                                                const Recipe& recipe, const NoiseBank& noise_bank,
                                                const std::vector<ImpulseResponse>& ir_bank) {
  if (ir_bank.empty()) throw Error("augment: empty impulse-response bank");
  for (const auto& tag : recipe.noise_tags) {
    if (!noise_bank.find(tag)) throw Error("augment: noise bank has no source tagged '" + tag + "'");
  }
  Rng rng = make_rng(recipe.seed, utt_id);
  std::vector<AugmentedVersion> out;
  if (recipe.kind != RecipeKind::kValidation) {
    audio::AugmentationInfo info{utt_id, audio::AugType::kClean, "", std::nullopt, "", false};
    out.push_back({utt_id + "-clean", clean, audio::Condition::clean(), info});
  }
  {
    std::uniform_int_distribution<std::size_t> pick(0, ir_bank.size() - 1);
    const ImpulseResponse& ir = ir_bank[pick(rng)];
    audio::AugmentationInfo info{utt_id, audio::AugType::kReverb, "", std::nullopt, ir.tag, false};
    out.push_back({utt_id + "-reverb", convolve_rir(clean, ir), audio::Condition::reverb(), info});
  }
  for (const auto& tag : recipe.noise_tags) {
    const Waveform& noise = noise_bank.find(tag)->waveform;
    std::vector<double> snrs = recipe.snr_grid;
    if (recipe.kind != RecipeKind::kTest) {
      std::uniform_real_distribution<double> u(recipe.snr_low_db, recipe.snr_high_db);
      snrs = {u(rng)};
    }
    for (double snr : snrs) {
      MixResult mix = mix_at_snr(clean, noise, snr, rng);
      std::string id = utt_id + "-" + tag;
      if (recipe.kind == RecipeKind::kTest) id += "-" + snr_suffix(snr);
      audio::AugmentationInfo info{utt_id, audio::AugType::kNoise, tag, snr, "", mix.rescaled};
      out.push_back({id, std::move(mix.mixture), audio::Condition::noise(tag, snr), info});
    }
  }
  return out;
}

std::vector<audio::ManifestEntry> augment_corpus(const std::vector<audio::ManifestEntry>& clean,
                                                 const std::string& clean_manifest_path,
                                                 const Recipe& recipe, const NoiseBank& noise_bank,
                                                 const std::vector<ImpulseResponse>& ir_bank,
                                                 const std::string& out_dir,
                                                 const AugmentOptions& options) {
  recipe.validate();
  if (noise_bank.sources.empty()) throw Error("augment: empty noise bank");
  if (ir_bank.empty()) throw Error("augment: empty impulse-response bank");
  std::filesystem::create_directories(std::filesystem::path(out_dir) / "wav");
  std::vector<std::vector<audio::ManifestEntry>> per_utt(clean.size());
  parallel_for(clean.size(), options.threads, [&](std::size_t i) {
    const audio::ManifestEntry& src = clean[i];
    const std::string src_path = audio::resolve_path(clean_manifest_path, src.wav_path);
    const std::string src_bytes = read_text_file(src_path);
    Waveform w = audio::parse_wav(src_bytes, src_path);
    for (auto& v : augment_utterance(src.id, w, recipe, noise_bank, ir_bank)) {
      const std::string rel = "wav/" + v.id + ".wav";
      const std::string path = (std::filesystem::path(out_dir) / rel).string();
      if (v.info.aug_type == audio::AugType::kClean) {
        write_text_file(path, src_bytes);
      } else {
        audio::write_wav(v.waveform, path);
      }
      per_utt[i].push_back({v.id, rel, v.condition, v.info});
    }
  });
  std::vector<audio::ManifestEntry> manifest;
  for (auto& v : per_utt) manifest.insert(manifest.end(), v.begin(), v.end());
  return manifest;
}

double sample_kurtosis(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mu = 0.0;
  for (double v : x) mu += v;
  mu /= static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - mu) * (v - mu);
    m2 += d;
    m4 += d * d;
  }
  m2 /= static_cast<double>(x.size());
  m4 /= static_cast<double>(x.size());
  return m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
}

}  // namespace rdu::augment
