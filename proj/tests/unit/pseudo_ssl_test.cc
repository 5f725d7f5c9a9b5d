// rdu/tests/unit/pseudo_ssl_test.cc

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

#include <cmath>
#include <complex>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rdu/augment/augment.h"
#include "rdu/ssl/pseudo_ssl.h"
#include "rdu/ssl/sslf.h"
#include "rdu/tensor/grad_check.h"

using namespace rdu;
using namespace rdu::ssl;

namespace {

audio::Waveform noise_wave(std::size_t n, double scale, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  audio::Waveform w;
  w.samples.resize(n);
  for (double& v : w.samples) v = g(rng);
  return w;
}

std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "rdu_ssl_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 255));
}

SslfError::Kind sslf_kind(const std::string& bytes) {
  try {
    decode_sslf(bytes);
  } catch (const SslfError& e) {
    return e.kind();
  }
  FAIL("expected SslfError");
  return SslfError::Kind::kIo;
}

}  // namespace

TEST_CASE("one second gives 49 frames") {
  PseudoEncoderConfig cfg;
  auto f = extract_features(noise_wave(16000, 0.1, 1), cfg);
  CHECK(f.num_layers() == 7);
  CHECK(f.num_frames() == 49);
  CHECK(f.dim() == 64);
  CHECK(f.frame_hop_ms == 20.0);
  CHECK_NOTHROW(f.validate());
  CHECK(cfg.default_cluster_layer() == 4);
}

TEST_CASE("too-short waveform is rejected") {
  CHECK_THROWS_AS(extract_features(noise_wave(399, 0.1, 1), {}), Error);
  CHECK(extract_features(noise_wave(400, 0.1, 1), {}).num_frames() == 1);
}

TEST_CASE("config validation") {
  PseudoEncoderConfig cfg;
  cfg.num_layers = 1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.dim = 4;
  CHECK_THROWS_AS(PseudoEncoder{cfg}, ConfigError);
}

TEST_CASE("features are deterministic and seed dependent") {
  auto w = noise_wave(8000, 0.1, 2);
  PseudoEncoderConfig cfg;
  auto a = extract_features(w, cfg);
  auto b = extract_features(w, cfg);
  for (std::size_t i = 0; i < a.num_layers(); ++i) CHECK(a.layers[i] == b.layers[i]);
  cfg.seed = 2;
  auto c = extract_features(w, cfg);
  CHECK_FALSE(a.layers[1] == c.layers[1]);
}

TEST_CASE("log mel matches a direct DFT") {
  PseudoEncoder enc({});
  auto w = noise_wave(1200, 0.2, 3);
  tensor::Tensor lm = enc.log_mel(w);
  REQUIRE(lm.rows() == 3);
  const auto& mel = enc.mel_filters();
  for (std::size_t t = 0; t < lm.rows(); ++t) {
    std::vector<double> power(257);
    for (std::size_t k = 0; k < 257; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t i = 0; i < 400; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * double(i) / 400.0);
        acc += w.samples[t * 320 + i] * hann *
               std::polar(1.0, -2.0 * std::numbers::pi * double(k * i) / 512.0);
      }
      power[k] = std::norm(acc);
    }
    for (std::size_t j = 0; j < 40; ++j) {
      double e = 0.0;
      for (std::size_t k = 0; k < 257; ++k) e += power[k] * mel(k, j);
      CHECK(lm(t, j) == doctest::Approx(std::log(e)).epsilon(1e-9));
    }
  }
}

TEST_CASE("mel filters are triangles covering the band") {
  PseudoEncoder enc({});
  const auto& mel = enc.mel_filters();
  for (std::size_t j = 0; j < mel.cols(); ++j) {
    double peak = 0.0, total = 0.0;
    for (std::size_t k = 0; k < mel.rows(); ++k) {
      CHECK(mel(k, j) >= 0.0);
      peak = std::max(peak, mel(k, j));
      total += mel(k, j);
    }
    CHECK(peak <= 1.0);
    CHECK(total > 0.0);
  }
}

TEST_CASE("layer weights are contractive") {
  PseudoEncoderConfig cfg;
  PseudoEncoder enc(cfg);
  Rng rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 1; i <= cfg.num_layers; ++i) {
    const auto& w = enc.layer_weight(i);
    CHECK(spectral_norm(w) <= 0.9 + 1e-9);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> x(64), y(64, 0.0);
      for (double& v : x) v = g(rng);
      for (std::size_t r = 0; r < 64; ++r)
        for (std::size_t c = 0; c < 64; ++c) y[c] += x[r] * w(r, c);
      double nx = 0, ny = 0;
      for (int k = 0; k < 64; ++k) {
        nx += x[k] * x[k];
        ny += y[k] * y[k];
      }
      CHECK(std::sqrt(ny) <= 0.9 * std::sqrt(nx) + 1e-9);
    }
  }
  tensor::Tensor diag = tensor::Tensor::matrix(3, 3);
  diag(0, 0) = 2.0;
  diag(1, 1) = -5.0;
  diag(2, 2) = 1.0;
  CHECK(spectral_norm(diag) == doctest::Approx(5.0));
}

TEST_CASE("layer states stay bounded") {
  PseudoEncoder enc({});
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const double scale = std::pow(10.0, -4.0 + 0.4 * double(seed));
    auto f = enc.extract(noise_wave(3200, scale, seed));
    const double base = tensor::max_abs(f.layers[0]);
    for (std::size_t i = 1; i < f.num_layers(); ++i) {
      CHECK(tensor::max_abs(f.layers[i]) <= base + double(i) + 1e-12);
    }
  }
}

TEST_CASE("zero-initialised adapters leave features unchanged") {
  PseudoEncoderConfig cfg;
  PseudoEncoder enc(cfg);
  tensor::ParameterStore adapters;
  add_adapters(adapters, cfg, 16, 5);
  CHECK(has_adapters(adapters, cfg));
  auto w = augment::synth_corpus({1, 8, 4, 3}).utterances[0].waveform;
  auto plain = enc.extract(w);
  auto adapted = enc.extract(w, &adapters);
  for (std::size_t i = 0; i < plain.num_layers(); ++i) CHECK(plain.layers[i] == adapted.layers[i]);

  tensor::ParameterStore partial;
  partial.add(adapter_name(1, "down"), tensor::Tensor::matrix(64, 16));
  CHECK_THROWS_AS(enc.extract(w, &partial), Error);
}

TEST_CASE("tape forward matches extraction") {
  PseudoEncoderConfig cfg;
  PseudoEncoder enc(cfg);
  tensor::ParameterStore adapters;
  add_adapters(adapters, cfg, 8, 6);
  Rng rng(6);
  std::normal_distribution<double> g(0.0, 0.1);
  for (auto& p : adapters.params())
    for (double& v : p.value.values()) v = g(rng);
  auto w = noise_wave(4000, 0.1, 6);
  auto feats = enc.extract(w, &adapters);
  tensor::Tape tape;
  auto states = enc.forward_layers(tape, feats.layers[0], &adapters);
  for (std::size_t i = 0; i < states.size(); ++i) CHECK(states[i].value() == feats.layers[i]);
}

TEST_CASE("adapter gradients match finite differences") {
  PseudoEncoderConfig cfg;
  cfg.num_layers = 3;
  cfg.dim = 8;
  PseudoEncoder enc(cfg);
  tensor::ParameterStore adapters;
  add_adapters(adapters, cfg, 4, 7);
  Rng rng(7);
  std::normal_distribution<double> g(0.0, 0.3);
  for (auto& p : adapters.params())
    for (double& v : p.value.values()) v = g(rng);
  const tensor::Tensor layer0 = enc.project(enc.log_mel(noise_wave(2000, 0.1, 7)));
  tensor::Tensor target = tensor::Tensor::matrix(layer0.rows(), layer0.cols());
  for (double& v : target.values()) v = g(rng);

  auto loss = [&](tensor::Tape& tape) {
    auto states = enc.forward_layers(tape, layer0, &adapters);
    tensor::Var acc = tensor::mul(states[1], tape.constant(target));
    for (std::size_t i = 2; i < states.size(); ++i) {
      acc = tensor::add(acc, tensor::mul(tensor::tanh(states[i]), tape.constant(target)));
    }
    return tensor::sum(acc);
  };
  auto report = tensor::grad_check(loss, adapters, 1e-5, 1e-5);
  INFO(report.summary());
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-5);

  tensor::Tape tape;
  auto grads = tape.backward(loss(tape));
  for (const auto& [name, grad] : grads) CHECK(name.rfind("adapter.", 0) == 0);
  CHECK(grads.size() == adapters.params().size());
}

TEST_CASE("select_layer range") {
  auto f = extract_features(noise_wave(2000, 0.1, 8), {});
  CHECK(&select_layer(f, 0) == &f.layers[0]);
  CHECK(&select_layer(f, 6) == &f.layers[6]);
  CHECK_THROWS_AS(select_layer(f, 7), Error);
  CHECK_THROWS_AS(select_layer(f, -1), Error);
}

TEST_CASE("sslf round trip is bit exact") {
  Rng rng(9);
  std::normal_distribution<double> g(0.0, 3.0);
  LayerStackFeatures f;
  for (int l = 0; l < 4; ++l) {
    tensor::Tensor t = tensor::Tensor::matrix(5, 7);
    for (double& v : t.values()) v = static_cast<float>(g(rng));
    f.layers.push_back(t);
  }
  const std::string path = tmp_path("rt.sslf");
  dump_features(f, path);
  auto back = load_features(path);
  REQUIRE(back.num_layers() == 4);
  for (int l = 0; l < 4; ++l) CHECK(back.layers[l] == f.layers[l]);
  CHECK(read_text_file(path) == encode_sslf(back));
  CHECK(read_text_file(path).size() == 20 + 4 * 4 * 5 * 7);
}

TEST_CASE("sslf handwritten fixture") {
  std::string b = "SSLF";
  put_u32(b, 1);
  put_u32(b, 2);
  put_u32(b, 3);
  put_u32(b, 4);
  for (int i = 0; i < 24; ++i) {
    const float v = 0.5f * float(i);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(b, bits);
  }
  auto f = decode_sslf(b);
  REQUIRE(f.num_layers() == 2);
  CHECK(f.num_frames() == 3);
  CHECK(f.dim() == 4);
  CHECK(f.layers[0](0, 0) == 0.0);
  CHECK(f.layers[0](2, 3) == 5.5);
  CHECK(f.layers[1](0, 1) == 6.5);
}

TEST_CASE("sslf errors have distinct kinds") {
  std::string good = "SSLF";
  put_u32(good, 1);
  put_u32(good, 1);
  put_u32(good, 1);
  put_u32(good, 2);
  put_u32(good, 0);
  put_u32(good, 0);
  CHECK_NOTHROW(decode_sslf(good));

  std::string magic = good;
  magic[0] = 'X';
  CHECK(sslf_kind(magic) == SslfError::Kind::kBadMagic);
  CHECK(sslf_kind(good.substr(0, good.size() - 1)) == SslfError::Kind::kTruncated);
  CHECK(sslf_kind(good.substr(0, 10)) == SslfError::Kind::kTruncated);
  CHECK(sslf_kind(good + "x") == SslfError::Kind::kMalformed);

  std::string version = good;
  version[4] = 2;
  CHECK(sslf_kind(version) == SslfError::Kind::kBadVersion);

  std::string huge = "SSLF";
  put_u32(huge, 1);
  put_u32(huge, 0xffffffffu);
  put_u32(huge, 0xffffffffu);
  put_u32(huge, 0xffffffffu);
  CHECK(sslf_kind(huge) == SslfError::Kind::kDimensionOverflow);

  std::string zero = good;
  zero[8] = 0;
  CHECK(sslf_kind(zero) == SslfError::Kind::kMalformed);

  try {
    load_features(tmp_path("does_not_exist.sslf"));
    FAIL("expected an error");
  } catch (const SslfError& e) {
    CHECK(e.kind() == SslfError::Kind::kIo);
  }
}
