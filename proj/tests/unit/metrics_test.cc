// rdu/tests/unit/metrics_test.cc

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
#include <functional>
#include <random>

#include "doctest.h"
#include "rdu/metrics/metrics.h"
#include "rdu/util/common.h"
#include "rdu/util/error.h"

using namespace rdu;
using namespace rdu::metrics;

namespace {

std::size_t brute_distance(const std::vector<int>& a, std::size_t i, const std::vector<int>& b,
                           std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t sub = brute_distance(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1);
  const std::size_t del = brute_distance(a, i + 1, b, j) + 1;
  const std::size_t ins = brute_distance(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

std::vector<int> random_seq(Rng& rng, int max_len, int vocab) {
  std::uniform_int_distribution<int> len(0, max_len), tok(0, vocab - 1);
  std::vector<int> v(len(rng));
  for (int& x : v) x = tok(rng);
  return v;
}

EvalPair pair(const std::string& id, audio::Condition c, std::vector<int> hyp, std::vector<int> ref) {
  return {id, std::move(c), std::move(hyp), std::move(ref)};
}

}  // namespace

TEST_CASE("edit distance examples") {
  CHECK(edit_distance<int>({1, 2, 3}, {1, 2, 3}) == AlignmentCounts{0, 0, 0, 3});
  CHECK(edit_distance<int>({1, 2, 3}, {1, 3}) == AlignmentCounts{0, 1, 0, 2});
  CHECK(edit_distance<int>({}, {4, 5}) == AlignmentCounts{0, 0, 2, 2});
  CHECK(edit_distance<int>({4, 5}, {}) == AlignmentCounts{0, 2, 0, 0});
  // One substitution is preferred over a deletion plus an insertion.
  CHECK(edit_distance<int>({1, 9, 3}, {1, 2, 3}) == AlignmentCounts{1, 0, 0, 3});
}

TEST_CASE("edit distance matches the recursion") {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = random_seq(rng, 6, 3), b = random_seq(rng, 6, 3), c = random_seq(rng, 6, 3);
    const auto ab = edit_distance(a, b);
    CHECK(ab.errors() == brute_distance(b, 0, a, 0));
    CHECK(ab.ref_length == b.size());
    CHECK(ab.errors() == edit_distance(b, a).errors());
    CHECK(edit_distance(a, c).errors() <= ab.errors() + edit_distance(b, c).errors());
    // Counts must be consistent with the lengths.
    CHECK(b.size() - ab.deletions + ab.insertions == a.size());
  }
}

TEST_CASE("uer") {
  CHECK(uer({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(uer({}, {1, 2, 3, 4}) == 100.0);
  CHECK(uer({1, 1, 2}, {1, 2}) == 0.0);
  CHECK(uer({1, 2, 3, 4, 5}, {1}) == 400.0);
  CHECK_THROWS_AS(uer({1}, {}), Error);
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    auto h = random_seq(rng, 8, 2), r = random_seq(rng, 8, 2);
    if (r.empty()) continue;
    auto dd = [](std::vector<int> v) {
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    CHECK((uer(h, r) == 0.0) == (dd(h) == dd(r)));
  }
}

TEST_CASE("token error rate") {
  CHECK(token_error_rate({"a", "b"}, {"a", "b"}) == 0.0);
  CHECK(token_error_rate({"the", "cat", "sat", "down"}, {"the", "cat", "sat", "up"}) == 25.0);
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    auto h = random_seq(rng, 6, 4), r = random_seq(rng, 6, 4);
    h.erase(std::unique(h.begin(), h.end()), h.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    if (r.empty()) continue;
    std::vector<std::string> hs, rs;
    for (int x : h) hs.push_back(std::to_string(x));
    for (int x : r) rs.push_back(std::to_string(x));
    CHECK(token_error_rate(hs, rs) == uer(h, r));
  }
}

TEST_CASE("snr buckets") {
  CHECK(bucket_of(audio::Condition::noise("x", 5)) == Bucket::kNoiseL);
  CHECK(bucket_of(audio::Condition::noise("x", 10)) == Bucket::kNoiseL);
  CHECK(bucket_of(audio::Condition::noise("x", 15)) == Bucket::kNoiseH);
  CHECK(bucket_of(audio::Condition::noise("x", 20)) == Bucket::kNoiseH);
  CHECK(bucket_of(audio::Condition::clean()) == Bucket::kClean);
  CHECK(bucket_of(audio::Condition::reverb()) == Bucket::kReverb);
  CHECK(bucket_of_label("noise:babble", 5.0) == Bucket::kNoiseL);
  CHECK_THROWS_AS(bucket_of_label("noise:babble", std::nullopt), Error);
  CHECK_THROWS_AS(bucket_of_label("music", std::nullopt), Error);
}

TEST_CASE("condition report fixtures") {
  SUBCASE("identical pairs") {
    std::vector<EvalPair> pairs = {pair("a", audio::Condition::clean(), {1, 2}, {1, 2}),
                                   pair("b", audio::Condition::reverb(), {3}, {3}),
                                   pair("c", audio::Condition::noise("s", 5), {1, 2, 3}, {1, 2, 3}),
                                   pair("d", audio::Condition::noise("s", 20), {4, 1}, {4, 1})};
    auto r = condition_report(pairs);
    for (Bucket b : kBuckets) CHECK(r.cell(b).uer == 0.0);
    CHECK(r.overall.uer == 0.0);
  }
  SUBCASE("known counts") {
    // Three utterances of ten units each; three errors in total.
    std::vector<int> ref = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> one_sub = ref, two_del = {0, 1, 2, 3, 4, 5, 6, 7};
    one_sub[3] = 7;
    auto c = audio::Condition::noise("s", 10);
    auto r = condition_report({pair("a", c, ref, ref), pair("b", c, one_sub, ref),
                               pair("c", c, two_del, ref)});
    const auto& cell = r.cell(Bucket::kNoiseL);
    CHECK(cell.counts == AlignmentCounts{1, 0, 2, 30});
    CHECK(cell.uer == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(cell.num_utterances == 3);
    CHECK_FALSE(r.cell(Bucket::kClean).present());
  }
  SUBCASE("pooled rather than averaged") {
    // 1 error over 2 units (50%) and 0 errors over 8 units (0%):
    // per-utterance mean 25%, pooled 10%.
    auto c = audio::Condition::reverb();
    auto r = condition_report({pair("a", c, {1, 3}, {1, 2}),
                               pair("b", c, {1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8})});
    CHECK(r.cell(Bucket::kReverb).uer == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(r.overall.uer == doctest::Approx(10.0).epsilon(1e-15));
  }
  SUBCASE("overall pools every bucket") {
    auto r = condition_report({pair("a", audio::Condition::clean(), {}, {1, 2}),
                               pair("b", audio::Condition::noise("s", 15), {1, 2}, {1, 2})});
    CHECK(r.cell(Bucket::kClean).uer == 100.0);
    CHECK(r.cell(Bucket::kNoiseH).uer == 0.0);
    CHECK(r.overall.uer == 50.0);
    CHECK(r.overall.std == doctest::Approx(100.0 * std::sqrt(0.25 / 4)));
    const std::string rec = r.records();
    CHECK(rec == "clean\t100\t35.35533905932738\t0\t0\t2\t2\t1\n"
                 "noise_h\t0\t35.35533905932738\t0\t0\t0\t2\t1\n"
                 "overall\t50\t25\t0\t0\t2\t4\t2\n");
    CHECK(r.table().find("Noise-L") != std::string::npos);
  }
}

TEST_CASE("binomial std") {
  CHECK(binomial_std(0.5, 250000) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(binomial_std(0.01, 250000) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(binomial_std(0.0, 100, false) == 0.0);
  CHECK(binomial_std(2.0, 100, false) == 0.0);
  CHECK(binomial_std(0.1, 100, false) == doctest::Approx(3.0));
  double prev = 1e9;
  for (std::size_t n = 1; n < 5000; n += 7) {
    const double s = binomial_std(0.3, n);
    CHECK(s < prev);
    prev = s;
  }
  CHECK_THROWS_AS(binomial_std(0.5, 0), Error);
}
