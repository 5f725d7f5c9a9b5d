// rdu/src/augment/synth.cc

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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rdu/augment/augment.h"
#include "rdu/util/error.h"
#include "rdu/util/fft.h"

namespace rdu::augment {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFs = audio::kSampleRate;

// Low-discrepancy position of unit u in [0, 1).
double spread(int u, double step) {
  double v = 0.37 + step * u;
  return v - std::floor(v);
}

struct UnitSignature {
  bool fricative = false;
  double f0 = 0.0;
  double f1 = 0.0, f2 = 0.0;
  double bw1 = 0.0, bw2 = 0.0;
  double center = 0.0, bandwidth = 0.0;
};

UnitSignature unit_signature(int u, std::uint64_t corpus_seed) {
  Rng rng = make_rng(corpus_seed, "unit-signature-" + std::to_string(u));
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  UnitSignature s;
  s.fricative = (u % 4 == 3);
  if (s.fricative) {
    s.center = 2200.0 + 4500.0 * (spread(u / 4, 0.618034) + jitter(rng));
    s.bandwidth = 500.0 + 200.0 * spread(u, 0.414214);
  } else {
    s.f0 = 95.0 + 140.0 * (spread(u, 0.7548777) + jitter(rng));
    s.f1 = 280.0 + 650.0 * (spread(u, 0.5698403) + jitter(rng));
    s.f2 = 950.0 + 1900.0 * (spread(u, 0.3247180) + jitter(rng));
    s.bw1 = 90.0;
    s.bw2 = 140.0;
  }
  return s;
}

void harmonic_tone(std::vector<double>& out, double f0, double f1, double f2, double bw1,
                   double bw2, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  for (int h = 1; h * f0 < 7000.0; ++h) {
    const double f = h * f0;
    const double a = std::exp(-0.5 * std::pow((f - f1) / bw1, 2)) +
                     0.7 * std::exp(-0.5 * std::pow((f - f2) / bw2, 2)) + 0.02;
    const double ph = phase(rng);
    const double w = 2.0 * kPi * f / kFs;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * std::sin(w * i + ph);
  }
}

// White noise shaped by a Gaussian band in the frequency domain.
std::vector<double> band_noise(std::size_t n, double center, double bandwidth, Rng& rng) {
  std::size_t nfft = 1;
  while (nfft < n) nfft <<= 1;
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(nfft);
  for (double& v : x) v = g(rng);
  RealFft fft(nfft);
  auto spec = fft.forward(x);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    const double f = static_cast<double>(k) * kFs / static_cast<double>(nfft);
    spec[k] *= std::exp(-0.5 * std::pow((f - center) / bandwidth, 2));
  }
  auto y = fft.inverse(spec);
  y.resize(n);
  return y;
}

void normalise_rms(std::vector<double>& x, double target) {
  double p = 0.0;
  for (double v : x) p += v * v;
  if (x.empty() || p <= 0.0) return;
  const double s = target / std::sqrt(p / static_cast<double>(x.size()));
  for (double& v : x) v *= s;
}

void apply_ramps(std::vector<double>& x, std::size_t ramp) {
  ramp = std::min(ramp, x.size() / 2);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double w = 0.5 - 0.5 * std::cos(kPi * (i + 0.5) / ramp);
    x[i] *= w;
    x[x.size() - 1 - i] *= w;
  }
}

}  // namespace

std::vector<double> synth_unit_segment(int unit_type, int num_unit_types, std::uint64_t corpus_seed,
                                       std::size_t length, Rng& rng) {
  if (unit_type < 0 || unit_type >= num_unit_types) {
    throw Error("synth_unit_segment: unit type " + std::to_string(unit_type) + " out of range");
  }
  const UnitSignature s = unit_signature(unit_type, corpus_seed);
  std::vector<double> seg(length, 0.0);
  if (s.fricative) {
    seg = band_noise(length, s.center, s.bandwidth, rng);
  } else {
    std::uniform_real_distribution<double> drift(0.97, 1.03);
    harmonic_tone(seg, s.f0 * drift(rng), s.f1, s.f2, s.bw1, s.bw2, rng);
  }
  std::uniform_real_distribution<double> level(0.08, 0.12);
  normalise_rms(seg, level(rng));
  apply_ramps(seg, audio::ms_to_samples(10.0));
  return seg;
}

SynthCorpus synth_corpus(const SynthCorpusConfig& config) {
  if (config.num_unit_types < 2) throw Error("synth_corpus: need at least 2 unit types");
  if (config.units_per_utterance < 1) throw Error("synth_corpus: need at least 1 unit per utterance");
  SynthCorpus corpus;
  const std::size_t edge = audio::ms_to_samples(50.0);
  for (int n = 0; n < config.num_utterances; ++n) {
    char id[32];
    std::snprintf(id, sizeof(id), "utt%05d", n);
    Rng rng = make_rng(config.seed, id);
    std::uniform_int_distribution<int> pick(0, config.num_unit_types - 1);
    std::uniform_int_distribution<std::size_t> len(audio::ms_to_samples(80.0),
                                                   audio::ms_to_samples(200.0));
    std::normal_distribution<double> dither(0.0, 1e-4);
    std::vector<int> script;
    std::vector<double> samples;
    for (std::size_t i = 0; i < edge; ++i) samples.push_back(dither(rng));
    for (int k = 0; k < config.units_per_utterance; ++k) {
      int u = pick(rng);
      while (!script.empty() && u == script.back()) u = pick(rng);
      script.push_back(u);
      auto seg = synth_unit_segment(u, config.num_unit_types, config.seed, len(rng), rng);
      for (double v : seg) samples.push_back(v + dither(rng));
    }
    for (std::size_t i = 0; i < edge; ++i) samples.push_back(dither(rng));
    audio::UtteranceRecord rec;
    rec.id = id;
    rec.waveform.samples = std::move(samples);
    corpus.utterances.push_back(std::move(rec));
    corpus.scripts.push_back(std::move(script));
  }
  return corpus;
}

namespace {

std::vector<double> stationary_noise(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> pole(0.5, 0.9);
  std::uniform_real_distribution<double> hiss(0.1, 0.4);
  const double a = pole(rng), b = hiss(rng);
  std::vector<double> x(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g(rng);
    s = a * s + (1.0 - a) * w;
    x[i] = s + b * w;
  }
  normalise_rms(x, 0.1);
  return x;
}

// Talkers switching between random vowel-like harmonic segments.
std::vector<double> babble(std::size_t n, int talkers, Rng& rng) {
  std::vector<double> x(n, 0.0);
  std::uniform_real_distribution<double> f0(90.0, 240.0), f1(250.0, 900.0), f2(800.0, 2800.0);
  std::uniform_int_distribution<std::size_t> seg_len(audio::ms_to_samples(70.0),
                                                     audio::ms_to_samples(250.0));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int t = 0; t < talkers; ++t) {
    std::size_t pos = 0;
    while (pos < n) {
      const std::size_t len = std::min(seg_len(rng), n - pos);
      std::vector<double> seg(len, 0.0);
      if (u01(rng) < 0.8) {
        harmonic_tone(seg, f0(rng), f1(rng), f2(rng), 100.0, 150.0, rng);
        normalise_rms(seg, 0.05 + 0.1 * u01(rng));
        apply_ramps(seg, audio::ms_to_samples(15.0));
      }
      for (std::size_t i = 0; i < len; ++i) x[pos + i] += seg[i];
      pos += len;
    }
  }
  normalise_rms(x, 0.1);
  return x;
}

std::vector<double> impulsive(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = 0.01 * g(rng);
  std::exponential_distribution<double> gap(4.0);  // bursts per second
  std::uniform_real_distribution<double> amp(0.3, 0.8), decay_ms(3.0, 25.0);
  double t = gap(rng);
  while (t * kFs < static_cast<double>(n)) {
    const std::size_t start = static_cast<std::size_t>(t * kFs);
    const double a = amp(rng);
    const double tau = decay_ms(rng) * 1e-3 * kFs;
    for (std::size_t i = 0; start + i < n && i < static_cast<std::size_t>(6.0 * tau); ++i) {
      x[start + i] += a * std::exp(-static_cast<double>(i) / tau) * g(rng);
    }
    t += gap(rng);
  }
  normalise_rms(x, 0.1);
  return x;
}

}  // namespace

NoiseBank synth_noise_bank(std::uint64_t seed, double duration_s) {
  const auto n = static_cast<std::size_t>(duration_s * kFs);
  NoiseBank bank;
  {
    Rng rng = make_rng(seed, "stationary");
    bank.sources.push_back({"stationary", {stationary_noise(n, rng), audio::kSampleRate}});
  }
  {
    Rng rng = make_rng(seed, "babble");
    std::uniform_int_distribution<int> talkers(4, 6);
    const int k = talkers(rng);
    bank.sources.push_back({"babble", {babble(n, k, rng), audio::kSampleRate}});
  }
  {
    Rng rng = make_rng(seed, "impulsive");
    bank.sources.push_back({"impulsive", {impulsive(n, rng), audio::kSampleRate}});
  }
  return bank;
}

std::vector<ImpulseResponse> synth_ir_bank(std::uint64_t seed, int count) {
  std::vector<ImpulseResponse> bank;
  for (int k = 0; k < count; ++k) {
    Rng rng = make_rng(seed, "ir-" + std::to_string(k));
    std::uniform_real_distribution<double> t60_dist(0.2, 0.8), drr_dist(-8.0, -2.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const double t60 = t60_dist(rng);
    const double drr_db = drr_dist(rng);
    const auto len = static_cast<std::size_t>(t60 * kFs);
    // Energy envelope falls by 60 dB over t60.
    const double r = std::exp(-3.0 * std::log(10.0) / (t60 * kFs));
    const double tail_gain = std::sqrt(std::pow(10.0, -drr_db / 10.0) * (1.0 - r * r));
    ImpulseResponse ir;
    ir.samples.assign(len, 0.0);
    ir.samples[0] = 1.0;
    double env = tail_gain;
    for (std::size_t i = 1; i < len; ++i) {
      env *= r;
      ir.samples[i] = env * g(rng);
    }
    // Keep the direct path as the argmax.
    const double peak = *std::max_element(ir.samples.begin() + 1, ir.samples.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (std::abs(peak) >= 1.0) {
      for (std::size_t i = 1; i < len; ++i) ir.samples[i] *= 0.95 / std::abs(peak);
    }
    ir.tag = "synth_ir" + std::to_string(k);
    bank.push_back(std::move(ir));
  }
  return bank;
}

Waveform synth_environment_noise(const std::string& kind, std::uint64_t seed, double duration_s) {
  const auto n = static_cast<std::size_t>(duration_s * kFs);
  Rng rng = make_rng(seed, "env-" + kind);
  Waveform w;
  if (kind == "car") {
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> engine(25.0, 45.0), boom(250.0, 600.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    const double fe = engine(rng);
    w.samples = band_noise(n, boom(rng), 300.0, rng);
    normalise_rms(w.samples, 1.0);
    std::vector<double> rumble(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s = 0.995 * s + 0.005 * g(rng);
      rumble[i] = s;
    }
    normalise_rms(rumble, 1.0);
    std::vector<double> hum(n, 0.0);
    for (int h = 1; h <= 12; ++h) {
      const double ph = phase(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double f = h * fe * (1.0 + 0.02 * std::sin(2.0 * kPi * 0.1 * i / kFs));
        hum[i] += std::sin(2.0 * kPi * f * i / kFs + ph) / h;
      }
    }
    normalise_rms(hum, 1.0);
    for (std::size_t i = 0; i < n; ++i) w.samples[i] = w.samples[i] + rumble[i] + 0.7 * hum[i];
  } else if (kind == "mall") {
    w.samples = babble(n, 10, rng);
    auto clatter = impulsive(n, rng);
    for (std::size_t i = 0; i < n; ++i) w.samples[i] += 0.5 * clatter[i];
  } else {
    throw Error("synth_environment_noise: unknown environment '" + kind + "'");
  }
  normalise_rms(w.samples, 0.1);
  return w;
}

}  // namespace rdu::augment
