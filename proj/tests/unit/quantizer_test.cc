// rdu/tests/unit/quantizer_test.cc

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
#include <filesystem>
#include <limits>
#include <random>

#include "doctest.h"
#include "rdu/quantizer/kmeans.h"
#include "rdu/util/common.h"
#include "rdu/util/error.h"

using namespace rdu;
using namespace rdu::quant;

namespace {

Tensor column(const std::vector<double>& v) { return Tensor({v.size(), 1}, v); }

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Tensor t = Tensor::matrix(r, c);
  for (double& v : t.values()) v = g(rng);
  return t;
}

// Best K=2 partition inertia by enumerating all 2^n labelings.
double best_partition_inertia(const std::vector<double>& x) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double s[2] = {0, 0}, c[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      s[(mask >> i) & 1] += x[i];
      c[(mask >> i) & 1] += 1;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1;
      const double d = x[i] - s[g] / c[g];
      total += d * d;
    }
    best = std::min(best, total);
  }
  return best;
}

std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "rdu_quantizer_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("separable 1-D points") {
  Codebook cb = train_kmeans(column({0, 0, 10, 10}), {.k = 2, .seed = 3});
  std::vector<double> c = {cb.centroids(0, 0), cb.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  CHECK(c == std::vector<double>{0.0, 10.0});
  CHECK(cb.meta.inertia_trace.back() == 0.0);
}

TEST_CASE("inertia trace never increases") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor x = random_matrix(300, 4, rng);
    Codebook cb = train_kmeans(x, {.k = 8, .seed = std::uint64_t(trial)});
    const auto& tr = cb.meta.inertia_trace;
    REQUIRE(tr.size() >= 2);
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] * (1 + 1e-12));
    CHECK(inertia(x, cb) == doctest::Approx(tr.back()).epsilon(1e-12));
    CHECK_NOTHROW(cb.validate());
  }
}

TEST_CASE("k-means reaches the best 2-partition") {
  // Each seed draws its own ten points and initialisation.
  std::normal_distribution<double> g(0.0, 1.0);
  int hits = 0, restart_hits = 0, trials = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    std::vector<double> x(10);
    for (double& v : x) v = g(rng);
    const double best = best_partition_inertia(x);
    Codebook one = train_kmeans(column(x), {.k = 2, .seed = seed});
    if (one.meta.inertia_trace.back() <= best * (1 + 1e-9)) ++hits;
    Codebook many = train_kmeans(column(x), {.k = 2, .restarts = 10, .seed = seed});
    if (many.meta.inertia_trace.back() <= best * (1 + 1e-9)) ++restart_hits;
    CHECK(one.meta.inertia_trace.back() >= best * (1 - 1e-9));
    ++trials;
  }
  CHECK(hits >= 8);
  CHECK(restart_hits == trials);
}

TEST_CASE("train_kmeans errors") {
  CHECK_THROWS_AS(train_kmeans(column({1, 2}), {.k = 3}), Error);
  CHECK_THROWS_AS(train_kmeans(column({1, std::nan(""), 3}), {.k = 2}), NumericalError);
  CHECK_THROWS_AS(train_kmeans(column({1, 1, 1}), {.k = 2}), Error);
  CHECK_THROWS_AS(train_kmeans(column({1, 2, 3}), {.k = 1}), ConfigError);
}

TEST_CASE("empty clusters are reseeded") {
  // Eight copies of one point and one outlier: K=3 forces a reseed path
  // whenever two seeds land on the duplicate block.
  Tensor x = column({0, 0, 0, 0, 0, 0, 0, 1, 100});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Codebook cb = train_kmeans(x, {.k = 3, .seed = seed});
    CHECK_NOTHROW(cb.validate());
    CHECK(cb.meta.inertia_trace.back() == 0.0);
  }
}

TEST_CASE("assign picks the nearest centroid with low-index ties") {
  Codebook cb;
  cb.centroids = Tensor({5, 2}, {0, 0, -1, 0, 1, 0, 5, 5, 9, 9});
  UnitSequence s = assign(Tensor({3, 2}, {5, 5, 0, 0, 0, 3}), cb, "u");
  CHECK(s.units == std::vector<int>{3, 0, 0});
  CHECK(s.utt_id == "u");
  CHECK_FALSE(s.deduplicated);
  // Equidistant between centroids 1 and 2.
  CHECK(assign(Tensor({1, 2}, {0, 7}), Codebook{Tensor({3, 2}, {50, 50, -1, 0, 1, 0}), 0, {}})
            .units == std::vector<int>{1});
  CHECK_THROWS_AS(assign(Tensor::matrix(2, 3), cb), ShapeError);
}

TEST_CASE("assign matches a naive scan") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    Codebook cb;
    cb.centroids = random_matrix(7, 5, rng);
    Tensor x = random_matrix(20, 5, rng);
    auto s = assign(x, cb);
    for (std::size_t t = 0; t < 20; ++t) {
      int best = -1;
      double bd = 0;
      for (std::size_t k = 0; k < 7; ++k) {
        double d = 0;
        for (std::size_t j = 0; j < 5; ++j) d += (x(t, j) - cb.centroids(k, j)) * (x(t, j) - cb.centroids(k, j));
        if (best < 0 || d < bd) {
          best = int(k);
          bd = d;
        }
      }
      CHECK(s.units[t] == best);
    }
  }
}

TEST_CASE("layer guard") {
  ssl::LayerStackFeatures f;
  for (int i = 0; i < 3; ++i) f.layers.push_back(Tensor::matrix(4, 2, double(i)));
  Codebook cb{Tensor({2, 2}, {0, 0, 2, 2}), 1, {}};
  CHECK(assign_layer(f, 1, cb).units == std::vector<int>{0, 0, 0, 0});
  CHECK_THROWS_AS(assign_layer(f, 2, cb), Error);
}

TEST_CASE("deduplicate") {
  CHECK(deduplicate(std::vector<int>{5, 5, 5, 2, 2, 5}) == std::vector<int>{5, 2, 5});
  CHECK(deduplicate(std::vector<int>{}).empty());
  UnitSequence s{"a", {1, 1, 2}, false};
  CHECK(deduplicate(s) == UnitSequence{"a", {1, 2}, true});
  Rng rng(4);
  std::uniform_int_distribution<int> u(0, 2), len(0, 12);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<int> v(len(rng));
    for (int& x : v) x = u(rng);
    auto d = deduplicate(v);
    CHECK(deduplicate(d) == d);
    CHECK(d.size() <= v.size());
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] != d[i - 1]);
    std::vector<int> heads;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (i == 0 || v[i] != v[i - 1]) heads.push_back(v[i]);
    CHECK(d == heads);
    if (!v.empty()) CHECK(d.front() == v.front());
  }
}

TEST_CASE("sample_frames keeps the requested share") {
  Rng rng(5);
  std::vector<Tensor> utts = {random_matrix(30, 3, rng), random_matrix(70, 3, rng)};
  Tensor s = sample_frames(utts, 0.3, 9);
  CHECK(s.rows() == 30);
  CHECK(sample_frames(utts, 0.3, 9) == s);
  CHECK_FALSE(sample_frames(utts, 0.3, 10) == s);
  CHECK(sample_frames(utts, 1.0, 1).rows() == 100);
  CHECK_THROWS_AS(sample_frames(utts, 0.0, 1), ConfigError);
  // Every sampled row is one of the inputs.
  for (std::size_t i = 0; i < s.rows(); ++i) {
    bool found = false;
    for (const auto& u : utts)
      for (std::size_t r = 0; r < u.rows(); ++r)
        if (std::equal(u.row(r).begin(), u.row(r).end(), s.row(i).begin())) found = true;
    CHECK(found);
  }
}

TEST_CASE("codebook file round trip") {
  Rng rng(6);
  Codebook cb;
  cb.centroids = random_matrix(4, 3, rng);
  for (double& v : cb.centroids.values()) v = static_cast<float>(v);
  cb.layer_index = 4;
  const std::string path = tmp_path("cb.kmns");
  write_codebook(path, cb);
  Codebook back = read_codebook(path);
  CHECK(back.centroids == cb.centroids);
  CHECK(back.layer_index == 4);
  const std::string bytes = read_text_file(path);
  CHECK(bytes.substr(0, 7) == "KMNS v1");
  CHECK(bytes.size() == 8 + 12 + 4 * 12);
  CHECK_THROWS_AS(decode_codebook("XMNS v1\n" + bytes.substr(8)), IoError);
  CHECK_THROWS_AS(decode_codebook(bytes.substr(0, bytes.size() - 1)), IoError);
  Codebook dup{Tensor({2, 1}, {1, 1}), 0, {}};
  CHECK_THROWS_AS(encode_codebook(dup), Error);
}

TEST_CASE("unit files") {
  std::vector<UnitSequence> seqs = {{"a", {1, 2, 3}, false}, {"b", {}, false}, {"c", {7}, false}};
  CHECK(format_units(seqs) == "a\t1 2 3\nb\t\nc\t7\n");
  const std::string path = tmp_path("x.units");
  write_units(path, seqs);
  CHECK(read_units(path) == seqs);
  CHECK(dedup_units_path(path).ends_with("x.dedup.units"));
  CHECK(dedup_units_path("y.dedup.units") == "y.dedup.units");
  write_units(dedup_units_path(path), {deduplicate(seqs[0])});
  CHECK(read_units(dedup_units_path(path))[0].deduplicated);
  CHECK_THROWS_AS(parse_units("noTab 1 2\n", "f"), IoError);
  CHECK_THROWS_AS(parse_units("a\t1 x\n", "f"), Error);
  CHECK_THROWS_AS(parse_units("a\t-1\n", "f"), IoError);
}
