// rdu/tests/unit/denoiser_test.cc

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
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>

#include "doctest.h"
#include "rdu/augment/augment.h"
#include "rdu/denoiser/ctc.h"
#include "rdu/denoiser/decode.h"
#include "rdu/denoiser/model.h"
#include "rdu/denoiser/train.h"
#include "rdu/metrics/metrics.h"
#include "rdu/tensor/grad_check.h"
#include "rdu/tensor/ops.h"

using namespace rdu;
using namespace rdu::denoiser;
using tensor::Tensor;

namespace {

double logsumexp(const std::vector<double>& v) {
  double m = -INFINITY;
  for (double x : v) m = std::max(m, x);
  if (m == -INFINITY) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

Tensor random_log_probs(std::size_t t, std::size_t v, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.5);
  Tensor lp = Tensor::matrix(t, v);
  for (std::size_t i = 0; i < t; ++i) {
    std::vector<double> row(v);
    for (double& x : row) x = g(rng);
    const double z = logsumexp(row);
    for (std::size_t k = 0; k < v; ++k) lp(i, k) = row[k] - z;
  }
  return lp;
}

std::vector<int> collapse(const std::vector<int>& path, int blank) {
  std::vector<int> out;
  int prev = -1;
  for (int s : path) {
    if (s != blank && s != prev) out.push_back(s);
    prev = s;
  }
  return out;
}

// -log sum over all V^T frame paths that collapse to target.
double brute_force_ctc(const Tensor& lp, const std::vector<int>& target, int blank) {
  const std::size_t t = lp.rows(), v = lp.cols();
  std::vector<int> path(t, 0);
  std::vector<double> hits;
  while (true) {
    if (collapse(path, blank) == target) {
      double s = 0.0;
      for (std::size_t i = 0; i < t; ++i) s += lp(i, static_cast<std::size_t>(path[i]));
      hits.push_back(s);
    }
    std::size_t i = 0;
    while (i < t && ++path[i] == static_cast<int>(v)) path[i++] = 0;
    if (i == t) break;
  }
  return -logsumexp(hits);
}

DenoiserConfig tiny_config(Variant variant = Variant::kExternal) {
  DenoiserConfig c;
  c.variant = variant;
  c.encoder_layers = 1;
  c.decoder_layers = 1;
  c.model_dim = 8;
  c.heads = 2;
  c.ffn_dim = 16;
  c.num_units = 3;
  c.adapter_bottleneck = 4;
  c.dropout = 0.0;
  c.ssl.num_layers = 2;
  c.ssl.dim = 8;
  c.seed = 11;
  return c;
}

ssl::LayerStackFeatures random_features(const DenoiserConfig& c, std::size_t frames,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ssl::LayerStackFeatures f;
  f.frame_hop_ms = 20.0;
  for (int l = 0; l <= c.ssl.num_layers; ++l) {
    Tensor t = Tensor::matrix(frames, static_cast<std::size_t>(c.ssl.dim));
    for (double& v : t.values()) v = g(rng);
    f.layers.push_back(t);
  }
  return f;
}

void randomise(tensor::ParameterStore& store, const std::string& prefix, double scale,
               std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  for (auto& p : store.params())
    if (p.name.rfind(prefix, 0) == 0)
      for (double& v : p.value.values()) v = g(rng);
}

// Toy task: each unit has a prototype vector; an utterance holds each unit
// for 2..4 frames with additive noise on every layer.
std::vector<TrainingExample> toy_examples(const DenoiserConfig& c, std::size_t n, double noise,
                                          std::uint64_t seed) {
  Rng proto_rng(99);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> proto(static_cast<std::size_t>(c.num_units));
  for (auto& p : proto) {
    p.resize(static_cast<std::size_t>(c.ssl.dim));
    for (double& v : p) v = 1.5 * g(proto_rng);
  }
  Rng rng(seed);
  std::uniform_int_distribution<int> unit(0, c.num_units - 1), len(3, 5), dur(2, 4);
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    TrainingExample ex;
    ex.id = "toy" + std::to_string(i);
    const int l = len(rng);
    while (static_cast<int>(ex.target.size()) < l) {
      const int u = unit(rng);
      if (ex.target.empty() || ex.target.back() != u) ex.target.push_back(u);
    }
    std::vector<int> frames;
    for (int u : ex.target)
      for (int d = dur(rng); d > 0; --d) frames.push_back(u);
    ex.features.frame_hop_ms = 20.0;
    for (int layer = 0; layer <= c.ssl.num_layers; ++layer) {
      Tensor t = Tensor::matrix(frames.size(), static_cast<std::size_t>(c.ssl.dim));
      for (std::size_t f = 0; f < frames.size(); ++f)
        for (std::size_t d = 0; d < t.cols(); ++d)
          t(f, d) = proto[static_cast<std::size_t>(frames[f])][d] + noise * g(rng);
      ex.features.layers.push_back(t);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

double eval_loss(const DenoiserModel& m, const TrainingExample& ex, std::optional<double> lam = {}) {
  tensor::Tape tape(false);
  return m.hybrid_loss(tape, ex, false, nullptr, lam).total.value().item();
}

std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "rdu_denoiser_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("ctc single frame and two frame examples") {
  Tensor one = Tensor::matrix(1, 2, std::log(0.5));
  CHECK(ctc_nll(one, std::vector<int>{1}, 0) == doctest::Approx(-std::log(0.5)).epsilon(1e-14));
  Tensor two = Tensor::matrix(2, 2, std::log(0.5));
  CHECK(std::abs(ctc_nll(two, std::vector<int>{1}, 0) + std::log(0.75)) < 1e-14);
  // Empty target: the all-blank path.
  CHECK(std::abs(ctc_nll(two, std::vector<int>{}, 0) + 2.0 * std::log(0.5)) < 1e-14);
}

TEST_CASE("ctc matches path enumeration") {
  Rng rng(2024);
  std::uniform_int_distribution<int> tdist(1, 6), vdist(2, 3), ldist(0, 3);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = static_cast<std::size_t>(tdist(rng));
    const int v = vdist(rng);
    const int blank = trial % v;
    std::vector<int> target;
    std::uniform_int_distribution<int> sym(0, v - 2);
    for (int i = ldist(rng); i > 0; --i) {
      int s = sym(rng);
      if (s >= blank) ++s;
      target.push_back(s);
    }
    Tensor lp = random_log_probs(t, static_cast<std::size_t>(v), rng);
    if (ctc_min_frames(target) > t) {
      CHECK_THROWS_AS(ctc_nll(lp, target, blank), CtcInfeasibleError);
      continue;
    }
    CHECK(std::abs(ctc_nll(lp, target, blank) - brute_force_ctc(lp, target, blank)) < 1e-9);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("ctc minimum frames and infeasible targets") {
  CHECK(ctc_min_frames(std::vector<int>{1, 1}) == 3);
  CHECK(ctc_min_frames(std::vector<int>{1, 2, 2, 1}) == 5);
  Tensor lp = Tensor::matrix(2, 3, std::log(1.0 / 3.0));
  CHECK_THROWS_AS(ctc_nll(lp, std::vector<int>{1, 1}, 0), CtcInfeasibleError);
  CHECK_NOTHROW(ctc_nll(lp, std::vector<int>{1, 2}, 0));
  CHECK_THROWS_AS(ctc_nll(lp, std::vector<int>{0}, 0), Error);  // blank in target
  CHECK_THROWS_AS(ctc_nll(lp, std::vector<int>{3}, 0), Error);
}

TEST_CASE("ctc gradient matches finite differences") {
  tensor::ParameterStore store;
  Rng rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor x = Tensor::matrix(6, 4);
  for (double& v : x.values()) v = g(rng);
  store.add("x", x);
  const std::vector<int> target{1, 2, 2};
  auto f = [&](tensor::Tape& tape) {
    return ctc_loss(tensor::log_softmax(tape.parameter(store, "x"), 1), target, 0);
  };
  auto report = tensor::grad_check(f, store, 1e-5, 1e-6);
  INFO(report.summary());
  CHECK(report.passed);
}

TEST_CASE("ctc greedy collapses repeats and blanks") {
  Tensor lp = Tensor::matrix(6, 3, -5.0);
  const int best[] = {1, 1, 0, 1, 2, 2};
  for (std::size_t t = 0; t < 6; ++t) lp(t, static_cast<std::size_t>(best[t])) = -0.01;
  CHECK(ctc_greedy(lp, 0) == std::vector<int>{1, 1, 2});
}

TEST_CASE("prefix score at end of sequence equals ctc likelihood") {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor lp = random_log_probs(5, 4, rng);
    CtcPrefixScorer scorer(lp, 3);
    std::uniform_int_distribution<int> sym(0, 2), len(0, 3);
    std::vector<int> target;
    for (int i = len(rng); i > 0; --i) {
      int s = sym(rng);
      if (!target.empty() && s == target.back()) s = (s + 1) % 3;
      target.push_back(s);
    }
    auto st = scorer.initial();
    double prev_prefix = 0.0;
    for (int s : target) {
      st = scorer.extend(st, s);
      CHECK(st.prefix <= prev_prefix + 1e-12);
      prev_prefix = st.prefix;
    }
    CHECK(std::abs(scorer.final_score(st) + ctc_nll(lp, target, 3)) < 1e-9);
    CHECK(scorer.final_score(st) <= st.prefix + 1e-12);
  }
}

TEST_CASE("sequence nll of one-hot and uniform predictions") {
  tensor::Tape tape(false);
  Tensor onehot = Tensor::matrix(3, 5, -INFINITY);
  const std::vector<int> ids{0, 4, 2};
  for (std::size_t i = 0; i < 3; ++i) onehot(i, static_cast<std::size_t>(ids[i])) = 0.0;
  CHECK(sequence_nll(tape.constant(onehot), ids).value().item() == 0.0);
  Tensor uniform = Tensor::matrix(3, 5, -std::log(5.0));
  CHECK(sequence_nll(tape.constant(uniform), ids).value().item() ==
        doctest::Approx(std::log(5.0)).epsilon(1e-14));
}

TEST_CASE("decoder is causal") {
  DenoiserModel m(tiny_config());
  randomise(m.params(), "dec.", 0.5, 3);
  auto f = random_features(m.config(), 5, 3);
  tensor::Tape tape(false);
  auto enc = m.encode(tape, f);
  auto mem = m.prepare_memory(tape, enc.states);
  const int sos = m.config().sos();
  Tensor a = m.decoder_log_probs(tape, mem, std::vector<int>{sos, 0, 1, 2}).value();
  Tensor b = m.decoder_log_probs(tape, mem, std::vector<int>{sos, 0, 2, 1}).value();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) CHECK(a(i, k) == b(i, k));
  bool differs = false;
  for (std::size_t k = 0; k < a.cols(); ++k) differs |= a(2, k) != b(2, k);
  CHECK(differs);

  // Per-position loss unchanged under permutation of later targets.
  auto per_pos = [&](const std::vector<int>& target) {
    std::vector<int> in{sos};
    in.insert(in.end(), target.begin(), target.end());
    return m.decoder_log_probs(tape, mem, in).value();
  };
  Tensor p = per_pos({1, 0, 2}), q = per_pos({1, 2, 0});
  CHECK(p(1, 0) == q(1, 0));
}

TEST_CASE("hybrid loss endpoints") {
  DenoiserModel m(tiny_config());
  auto ex = toy_examples(m.config(), 1, 0.3, 4)[0];
  tensor::Tape tape(false);
  auto enc = m.encode(tape, ex.features);
  const double ctc = ctc_nll(enc.ctc_log_probs.value(), ex.target, m.config().blank());
  const double ce =
      m.decoder_ce_loss(tape, m.prepare_memory(tape, enc.states), ex.target).value().item();
  CHECK(eval_loss(m, ex, 1.0) == ctc);
  CHECK(eval_loss(m, ex, 0.0) == ce);
  CHECK(eval_loss(m, ex, 0.3) == doctest::Approx(0.3 * ctc + 0.7 * ce).epsilon(1e-13));
  CHECK_THROWS_AS(eval_loss(m, ex, 1.5), ConfigError);

  DenoiserModel enc_only(variant_config("encoder_only", tiny_config()));
  CHECK(!enc_only.config().has_decoder());
  CHECK_THROWS_AS(eval_loss(enc_only, ex, 0.5), ConfigError);
  tensor::Tape t2(false);
  auto e2 = enc_only.encode(t2, ex.features);
  CHECK_THROWS_AS(enc_only.prepare_memory(t2, e2.states), Error);
}

TEST_CASE("hybrid loss gradients for both variants") {
  for (Variant v : {Variant::kExternal, Variant::kAdapter}) {
    CAPTURE(to_string(v));
    DenoiserModel m(tiny_config(v));
    randomise(m.params(), "adapter.", 0.3, 8);
    randomise(m.params(), "ws.", 0.5, 9);
    auto ex = toy_examples(m.config(), 1, 0.3, 5)[0];
    ex.features = random_features(m.config(), 4, 6);
    ex.target = {0, 2};
    auto f = [&](tensor::Tape& tape) { return m.hybrid_loss(tape, ex).total; };
    auto report = tensor::grad_check(f, m.params(), 1e-5, 1e-4);
    INFO(report.summary());
    CHECK(report.passed);
    CHECK(report.max_rel_error < 1e-4);
    bool saw_adapter = false;
    for (const auto& e : report.entries) saw_adapter |= e.name.rfind("adapter.", 0) == 0;
    CHECK(saw_adapter == (v == Variant::kAdapter));
    CHECK(report.entries.size() == m.params().params().size());
  }
}

TEST_CASE("weighted sum starts uniform and encoder none passes projection through") {
  DenoiserConfig c = variant_config("decoder_only", tiny_config());
  CHECK(c.encoder_kind == EncoderKind::kNone);
  DenoiserModel m(c);
  auto w = m.layer_weights();
  REQUIRE(w.size() == 3);
  for (double x : w) CHECK(x == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  auto f = random_features(c, 7, 12);
  tensor::Tape tape(false);
  auto enc = m.encode(tape, f);
  const Tensor& s = enc.states.value();
  CHECK(s.rows() == 7);
  CHECK(s.cols() == 8);
  CHECK(enc.ctc_log_probs.value().rows() == 7);
  const Tensor& pw = m.params().get("proj.w").value;
  const Tensor& pb = m.params().get("proj.b").value;
  double err = 0.0;
  for (std::size_t t = 0; t < 7; ++t) {
    for (std::size_t j = 0; j < 8; ++j) {
      double acc = pb.values()[j];
      for (std::size_t d = 0; d < 8; ++d) {
        const double mean = (f.layers[0](t, d) + f.layers[1](t, d) + f.layers[2](t, d)) / 3.0;
        acc += mean * pw(d, j);
      }
      err = std::max(err, std::abs(acc - s(t, j)));
    }
  }
  CHECK(err < 1e-12);

  randomise(m.params(), "ws.", 2.0, 1);
  w = m.layer_weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  for (double x : w) CHECK(x > 0.0);
}

TEST_CASE("encode rejects mismatched features") {
  DenoiserModel m(tiny_config());
  auto f = random_features(m.config(), 4, 1);
  f.layers.pop_back();
  tensor::Tape tape(false);
  CHECK_THROWS_AS(m.encode(tape, f), ShapeError);
  CHECK_THROWS_AS(beam_search(m, ssl::LayerStackFeatures{}, {}), Error);
}

TEST_CASE("exhaustive beam equals brute-force joint maximum") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    DenoiserConfig c = tiny_config();
    c.seed = seed;
    DenoiserModel m(c);
    randomise(m.params(), "dec.", 0.8, seed);
    randomise(m.params(), "ctc.", 0.8, seed + 100);
    auto f = random_features(c, 4, seed + 200);
    for (double alpha : {0.0, 0.3, 0.7}) {
      CAPTURE(seed);
      CAPTURE(alpha);
      std::vector<std::vector<int>> all{{}};
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].size() == 3) continue;
        for (int u = 0; u < c.num_units; ++u) {
          if (!all[i].empty() && all[i].back() == u) continue;
          auto next = all[i];
          next.push_back(u);
          all.push_back(next);
        }
      }
      double best = -INFINITY;
      std::vector<int> arg;
      for (const auto& s : all) {
        const double j = joint_score(m, f, s, alpha);
        if (j > best) best = j, arg = s;
      }
      Hypothesis h = beam_search(m, f, {64, alpha, 3});
      CHECK(h.tokens == arg);
      CHECK(std::abs(h.score - best) < 1e-9);
    }
  }
}

TEST_CASE("beam one without ctc is greedy attention decoding") {
  DenoiserModel m(tiny_config());
  randomise(m.params(), "dec.", 0.8, 21);
  auto f = random_features(m.config(), 6, 22);
  const auto& c = m.config();
  tensor::Tape tape(false);
  auto enc = m.encode(tape, f);
  auto mem = m.prepare_memory(tape, enc.states);
  std::vector<int> in{c.sos()};
  for (int step = 0; step < 12; ++step) {
    Tensor lp = m.decoder_log_probs(tape, mem, in).value();
    const std::size_t r = lp.rows() - 1;
    int best = c.eos();
    for (int u = 0; u < c.num_units; ++u)
      if (u != in.back() && lp(r, static_cast<std::size_t>(u)) > lp(r, static_cast<std::size_t>(best))) best = u;
    if (best == c.eos()) break;
    in.push_back(best);
  }
  std::vector<int> greedy(in.begin() + 1, in.end());
  CHECK(decode_units(m, f, {1, 0.0, 0}) == greedy);
}

TEST_CASE("decoded sequences contain only units without repeats") {
  for (const char* name : {"encoder_only", "encoder_decoder", "decoder_only"}) {
    DenoiserModel m(variant_config(name, tiny_config()));
    randomise(m.params(), "ctc.", 1.0, 4);
    randomise(m.params(), "dec.", 1.0, 5);
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto units = decode_units(m, random_features(m.config(), 8, s), {3, 0.3, 0});
      for (std::size_t i = 0; i < units.size(); ++i) {
        CHECK(units[i] >= 0);
        CHECK(units[i] < m.config().num_units);
        if (i > 0) CHECK(units[i] != units[i - 1]);
      }
      CHECK(units.size() <= 16);
    }
  }
}

TEST_CASE("adapter variant starts identical to external variant") {
  DenoiserConfig base = tiny_config();
  base.ssl.n_mels = 16;
  base.ssl.fft_size = 512;
  DenoiserModel ext(base);
  DenoiserModel ada(variant_config("adapter_encoder_decoder", base));
  CHECK(ada.num_parameters() > ext.num_parameters());
  for (const auto& p : ext.params().params()) CHECK(ada.params().get(p.name).value == p.value);

  ssl::PseudoEncoder enc(base.ssl);
  auto corpus = augment::synth_corpus({2, 8, 4, 3});
  for (const auto& u : corpus.utterances) {
    TrainingExample ex;
    ex.features = enc.extract(u.waveform);
    ex.target = {0, 1, 2, 1};
    tensor::Tape ta(false), tb(false);
    auto ea = ext.encode(ta, ex.features), eb = ada.encode(tb, ex.features);
    CHECK(ea.states.value() == eb.states.value());
    CHECK(ea.ctc_log_probs.value() == eb.ctc_log_probs.value());
    CHECK(eval_loss(ext, ex) == eval_loss(ada, ex));
  }
}

TEST_CASE("config validation and header round trip") {
  DenoiserConfig c = tiny_config();
  c.decoder_layers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.ctc_weight = 1.0;
  CHECK_NOTHROW(c.validate());
  c = tiny_config();
  c.heads = 3;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("denoiser.heads"), ConfigError);
  CHECK_THROWS_AS(variant_config("conformer", tiny_config()), ConfigError);
  CHECK_THROWS_AS(parse_variant("mixed"), ConfigError);

  DenoiserConfig a = variant_config("adapter_encoder_decoder", tiny_config());
  a.seed = 0xfedcba9876543210ull;  // above the signed range
  a.ssl.seed = ~0ull;
  DenoiserConfig b = DenoiserConfig::from_header(a.to_header());
  CHECK(b.to_header() == a.to_header());
  CHECK(b.variant == Variant::kAdapter);
  CHECK(b.seed == a.seed);
  CHECK(b.ssl.seed == a.ssl.seed);
}

TEST_CASE("checkpoint round trip preserves losses") {
  DenoiserModel m(variant_config("adapter_encoder_decoder", tiny_config()));
  randomise(m.params(), "adapter.", 0.2, 3);
  const std::string path = tmp_path("model.ckpt");
  m.save(path);
  DenoiserModel r = DenoiserModel::load(path);
  CHECK(r.config().to_header() == m.config().to_header());
  auto ex = toy_examples(m.config(), 1, 0.3, 9)[0];
  ex.features = random_features(m.config(), 6, 9);
  CHECK(eval_loss(r, ex) == eval_loss(m, ex));
}

TEST_CASE("training log line format") {
  EpochLog e{3, 1.25, 2.5, 40.0};
  const std::string line = format_log_line(e);
  CHECK(std::count(line.begin(), line.end(), '\t') == 3);
  EpochLog p = parse_log_line(line);
  CHECK(p.epoch == 3);
  CHECK(p.train_loss == 1.25);
  CHECK(p.valid_uer == 40.0);
  CHECK_THROWS_AS(parse_log_line("1\t2"), IoError);
}

TEST_CASE("smoke training reduces validation loss and is deterministic") {
  DenoiserConfig c = tiny_config();
  c.dropout = 0.1;
  auto train = toy_examples(c, 8, 0.3, 1);
  auto valid = toy_examples(c, 4, 0.3, 2);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 2;
  tc.schedule.peak_lr = 3e-3;
  tc.schedule.warmup_steps = 2;
  tc.seed = 4;
  DenoiserModel a(c), b(c);
  auto ra = train_denoiser(a, train, valid, tc);
  auto rb = train_denoiser(b, train, valid, tc);
  REQUIRE(ra.log.size() == 3);
  CHECK(ra.log[0].epoch == 0);
  CHECK(ra.steps == 8);
  for (const auto& e : ra.log) {
    CHECK(std::isfinite(e.train_loss));
    CHECK(std::isfinite(e.valid_loss));
  }
  CHECK(ra.best_epoch > 0);
  CHECK(ra.log[static_cast<std::size_t>(ra.best_epoch)].valid_loss < ra.log[0].valid_loss);
  for (std::size_t i = 0; i < ra.log.size(); ++i)
    CHECK(format_log_line(ra.log[i]) == format_log_line(rb.log[i]));
  for (const auto& p : a.params().params()) CHECK(b.params().get(p.name).value == p.value);

  CHECK_THROWS_AS(train_denoiser(a, {}, valid, tc), Error);
  auto missing = train;
  missing[2].target.clear();
  CHECK_THROWS_AS(train_denoiser(a, missing, valid, tc), Error);
}

TEST_CASE("training improves clean-input UER") {
  DenoiserConfig c = tiny_config();
  c.model_dim = 16;
  c.ffn_dim = 32;
  auto train = toy_examples(c, 24, 0.2, 31);
  auto valid = toy_examples(c, 8, 0.2, 32);
  auto held = toy_examples(c, 8, 0.2, 33);
  DenoiserModel m(c);
  const BeamConfig beam{4, 0.3, 0};
  const double before = corpus_uer(m, held, beam);
  TrainConfig tc;
  tc.epochs = 12;
  tc.batch_size = 4;
  tc.schedule.peak_lr = 5e-3;
  tc.schedule.warmup_steps = 10;
  auto r = train_denoiser(m, train, valid, tc);
  const double after = corpus_uer(m, held, beam);
  INFO("before " << before << " after " << after);
  CHECK(after < before);
  CHECK(r.best_valid_uer <= r.log[0].valid_uer);
}

TEST_CASE("encoder finetuning leaves the rest bitwise unchanged") {
  DenoiserModel m(variant_config("adapter_encoder_decoder", tiny_config()));
  randomise(m.params(), "adapter.", 0.2, 2);
  auto data = toy_examples(m.config(), 6, 0.3, 7);
  for (auto& ex : data) ex.features = random_features(m.config(), ex.features.num_frames(), ex.target.size());
  const tensor::ParameterStore before = m.params();

  FinetuneConfig fc;
  fc.steps = 0;
  finetune_encoder(m, data, fc);
  for (const auto& p : before.params()) CHECK(m.params().get(p.name).value == p.value);

  fc.steps = 4;
  fc.batch_size = 4;
  finetune_encoder(m, data, fc);
  int changed = 0;
  for (const auto& p : before.params()) {
    const bool same = m.params().get(p.name).value == p.value;
    if (is_encoder_param(p.name)) changed += !same;
    else CHECK_MESSAGE(same, p.name);
    CHECK(m.params().get(p.name).trainable == p.trainable);
  }
  CHECK(changed > 0);
  CHECK(is_encoder_param("enc.0.ffn.1.w"));
  CHECK(is_encoder_param("ws.logits"));
  CHECK(!is_encoder_param("ctc.w"));
  CHECK(!is_encoder_param("dec.0.cross.q.w"));
  CHECK(!is_encoder_param("adapter.1.up"));
  CHECK_THROWS_AS(finetune_encoder(m, {}, fc), Error);
}
