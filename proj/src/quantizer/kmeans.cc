// rdu/src/quantizer/kmeans.cc

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

#include "rdu/quantizer/kmeans.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace rdu::quant {

namespace {

const char kMagic[] = "KMNS v1\n";
constexpr std::size_t kMagicLen = 8;

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// Nearest centroid and its squared distance; strict '<' keeps the lower index on ties.
std::pair<int, double> nearest(std::span<const double> x, const Tensor& c) {
  int best = 0;
  double best_d = sqdist(x, c.row(0));
  for (std::size_t k = 1; k < c.rows(); ++k) {
    const double d = sqdist(x, c.row(k));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return {best, best_d};
}

void check_features(const Tensor& features, const char* what) {
  if (features.rank() != 2) throw ShapeError(std::string(what) + ": expected a matrix");
  if (!features.all_finite()) throw NumericalError(std::string(what) + ": non-finite features");
}

Codebook train_once(const Tensor& x, const KmeansOptions& opt, std::uint64_t seed,
                    int layer_index) {
  const std::size_t n = x.rows(), d = x.cols();
  const auto k = static_cast<std::size_t>(opt.k);
  Rng rng = make_rng(seed, "kmeans");
  Tensor c = Tensor::matrix(k, d);

  // k-means++ seeding.
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  std::size_t pick = first(rng);
  for (std::size_t j = 0; j < k; ++j) {
    if (j > 0) {
      const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
      if (!(total > 0.0)) {
        throw Error("train_kmeans: fewer than K distinct points (K=" + std::to_string(k) + ")");
      }
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng), acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist[i];
        if (acc > r && dist[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (dist[pick] == 0.0) --pick;  // rounding at the tail
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), c.row(j).begin());
    for (std::size_t i = 0; i < n; ++i) dist[i] = std::min(dist[i], sqdist(x.row(i), c.row(j)));
  }

  Codebook cb;
  cb.layer_index = layer_index;
  cb.meta.seed = seed;
  std::vector<int> label(n);
  std::vector<double> near(n);
  auto assign_all = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [l, dd] = nearest(x.row(i), c);
      label[i] = l;
      near[i] = dd;
      total += dd;
    }
    cb.meta.inertia_trace.push_back(total);
  };

  auto lloyd = [&]() {
    while (cb.meta.iterations < opt.max_iters) {
      Tensor next = Tensor::matrix(k, d);
      std::vector<std::size_t> count(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        auto row = next.row(static_cast<std::size_t>(label[i]));
        for (std::size_t j = 0; j < d; ++j) row[j] += x(i, j);
        ++count[static_cast<std::size_t>(label[i])];
      }
      std::vector<bool> taken(n, false);
      for (std::size_t j = 0; j < k; ++j) {
        if (count[j] > 0) {
          for (double& v : next.row(j)) v /= static_cast<double>(count[j]);
          continue;
        }
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!taken[i] && near[i] > far_d) {
            far_d = near[i];
            far = i;
          }
        }
        taken[far] = true;
        std::copy(x.row(far).begin(), x.row(far).end(), next.row(j).begin());
      }
      double shift = 0.0;
      for (std::size_t j = 0; j < k; ++j) shift += std::sqrt(sqdist(c.row(j), next.row(j)));
      shift /= static_cast<double>(k);
      c = std::move(next);
      ++cb.meta.iterations;
      assign_all();
      if (shift < opt.tol) return;
    }
  };

  // Single-point transfers that lower the total cost once centroids follow
  // their members; Lloyd alone stalls in poor local optima.
  auto transfer_pass = [&]() {
    Tensor mean = Tensor::matrix(k, d);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = mean.row(static_cast<std::size_t>(label[i]));
      for (std::size_t j = 0; j < d; ++j) row[j] += x(i, j);
      count[static_cast<std::size_t>(label[i])] += 1.0;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] == 0.0) return false;
      for (double& v : mean.row(j)) v /= count[j];
    }
    bool moved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::size_t>(label[i]);
      if (count[a] < 2.0) continue;
      const double leave = count[a] / (count[a] - 1.0) * sqdist(x.row(i), mean.row(a));
      std::size_t best = a;
      double best_cost = leave;
      for (std::size_t b = 0; b < k; ++b) {
        if (b == a) continue;
        const double join = count[b] / (count[b] + 1.0) * sqdist(x.row(i), mean.row(b));
        if (join < best_cost * (1.0 - 1e-12)) {
          best_cost = join;
          best = b;
        }
      }
      if (best == a) continue;
      for (std::size_t j = 0; j < d; ++j) {
        mean(a, j) = (mean(a, j) * count[a] - x(i, j)) / (count[a] - 1.0);
        mean(best, j) = (mean(best, j) * count[best] + x(i, j)) / (count[best] + 1.0);
      }
      count[a] -= 1.0;
      count[best] += 1.0;
      label[i] = static_cast<int>(best);
      moved = true;
    }
    if (!moved) return false;
    // Exact means of the new partition.
    mean.fill(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = mean.row(static_cast<std::size_t>(label[i]));
      for (std::size_t j = 0; j < d; ++j) row[j] += x(i, j);
    }
    for (std::size_t j = 0; j < k; ++j)
      for (double& v : mean.row(j)) v /= count[j];
    c = std::move(mean);
    return true;
  };

  assign_all();
  lloyd();
  while (cb.meta.iterations < opt.max_iters && transfer_pass()) {
    ++cb.meta.iterations;
    assign_all();
    lloyd();
  }
  cb.centroids = std::move(c);
  return cb;
}

}  // namespace

void Codebook::validate() const {
  if (centroids.rank() != 2 || k() < 2) throw Error("codebook: need at least 2 centroids");
  if (!centroids.all_finite()) throw NumericalError("codebook: non-finite centroid");
  for (std::size_t a = 0; a < k(); ++a)
    for (std::size_t b = a + 1; b < k(); ++b)
      if (sqdist(centroids.row(a), centroids.row(b)) == 0.0) {
        throw Error("codebook: centroids " + std::to_string(a) + " and " + std::to_string(b) +
                    " coincide");
      }
  if (layer_index < 0) throw Error("codebook: negative layer index");
}

Codebook train_kmeans(const Tensor& features, const KmeansOptions& options, int layer_index) {
  check_features(features, "train_kmeans");
  if (options.k < 2) throw ConfigError("quantizer.k: must be at least 2");
  if (options.restarts < 1) throw ConfigError("quantizer.restarts: must be at least 1");
  if (features.rows() < static_cast<std::size_t>(options.k)) {
    throw Error("train_kmeans: " + std::to_string(features.rows()) + " points for K=" +
                std::to_string(options.k));
  }
  Codebook best;
  for (int r = 0; r < options.restarts; ++r) {
    Codebook cb = train_once(features, options, options.seed + static_cast<std::uint64_t>(r),
                             layer_index);
    if (r == 0 || cb.meta.inertia_trace.back() < best.meta.inertia_trace.back()) best = std::move(cb);
  }
  return best;
}

double inertia(const Tensor& features, const Codebook& codebook) {
  check_features(features, "inertia");
  if (features.cols() != codebook.dim()) throw ShapeError("inertia: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < features.rows(); ++i) total += nearest(features.row(i), codebook.centroids).second;
  return total;
}

Tensor sample_frames(const std::vector<Tensor>& per_utterance, double fraction,
                     std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("quantizer.subset_fraction: must lie in (0, 1]");
  }
  std::size_t total = 0, d = 0;
  for (const auto& t : per_utterance) {
    if (t.rank() != 2) throw ShapeError("sample_frames: expected matrices");
    if (total > 0 && t.cols() != d) throw ShapeError("sample_frames: ragged dimensions");
    d = t.cols();
    total += t.rows();
  }
  if (total == 0) throw Error("sample_frames: no frames");
  std::vector<std::pair<std::size_t, std::size_t>> index;
  for (std::size_t u = 0; u < per_utterance.size(); ++u)
    for (std::size_t r = 0; r < per_utterance[u].rows(); ++r) index.emplace_back(u, r);
  Rng rng = make_rng(seed, "frame-subset");
  std::shuffle(index.begin(), index.end(), rng);
  const std::size_t keep =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * double(total))));
  index.resize(keep);
  std::sort(index.begin(), index.end());
  Tensor out = Tensor::matrix(keep, d);
  for (std::size_t i = 0; i < keep; ++i) {
    auto src = per_utterance[index[i].first].row(index[i].second);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

UnitSequence assign(const Tensor& features, const Codebook& codebook, std::string utt_id) {
  if (features.rank() != 2 || features.cols() != codebook.dim()) {
    throw ShapeError("assign: features have shape " + tensor::shape_string(features.shape()) +
                     " but the codebook dimension is " + std::to_string(codebook.dim()));
  }
  UnitSequence seq;
  seq.utt_id = std::move(utt_id);
  seq.units.reserve(features.rows());
  for (std::size_t t = 0; t < features.rows(); ++t) {
    seq.units.push_back(nearest(features.row(t), codebook.centroids).first);
  }
  return seq;
}

UnitSequence assign_layer(const ssl::LayerStackFeatures& features, int layer_index,
                          const Codebook& codebook, std::string utt_id) {
  if (layer_index != codebook.layer_index) {
    throw Error("assign: codebook was trained on layer " + std::to_string(codebook.layer_index) +
                ", not layer " + std::to_string(layer_index));
  }
  return assign(ssl::select_layer(features, layer_index), codebook, std::move(utt_id));
}

std::vector<int> deduplicate(const std::vector<int>& units) {
  std::vector<int> out;
  for (int u : units)
    if (out.empty() || out.back() != u) out.push_back(u);
  return out;
}

UnitSequence deduplicate(const UnitSequence& seq) {
  return {seq.utt_id, deduplicate(seq.units), true};
}

std::string encode_codebook(const Codebook& codebook) {
  codebook.validate();
  std::string out(kMagic, kMagicLen);
  auto put = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put(static_cast<std::uint32_t>(codebook.k()));
  put(static_cast<std::uint32_t>(codebook.dim()));
  put(static_cast<std::uint32_t>(codebook.layer_index));
  for (double v : codebook.centroids.values()) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Codebook decode_codebook(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < kMagicLen || bytes.compare(0, kMagicLen, kMagic) != 0) {
    throw IoError(origin + ": not a codebook file (bad magic)");
  }
  if (bytes.size() < kMagicLen + 12) throw IoError(origin + ": truncated codebook header");
  auto get = [&](std::size_t pos) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    return v;
  };
  const std::uint64_t k = get(kMagicLen), d = get(kMagicLen + 4);
  const std::uint32_t layer = get(kMagicLen + 8);
  if (k == 0 || d == 0) throw IoError(origin + ": zero codebook dimension");
  if (bytes.size() != kMagicLen + 12 + 4 * k * d) {
    throw IoError(origin + ": codebook payload has " + std::to_string(bytes.size() - kMagicLen - 12) +
                  " bytes, expected " + std::to_string(4 * k * d));
  }
  Codebook cb;
  cb.layer_index = static_cast<int>(layer);
  cb.centroids = Tensor::matrix(k, d);
  std::size_t pos = kMagicLen + 12;
  for (double& v : cb.centroids.values()) {
    v = std::bit_cast<float>(get(pos));
    pos += 4;
  }
  cb.validate();
  return cb;
}

void write_codebook(const std::string& path, const Codebook& codebook) {
  write_text_file(path, encode_codebook(codebook));
}

Codebook read_codebook(const std::string& path) { return decode_codebook(read_text_file(path), path); }

std::string format_units(const std::vector<UnitSequence>& seqs) {
  std::string out;
  for (const auto& s : seqs) {
    out += s.utt_id;
    out += '\t';
    for (std::size_t i = 0; i < s.units.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(s.units[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<UnitSequence> parse_units(const std::string& text, const std::string& origin) {
  std::vector<UnitSequence> out;
  int lineno = 0;
  for (const auto& line : split(text, '\n')) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw IoError(origin + ":" + std::to_string(lineno) + ": expected 'utt_id<TAB>units'");
    }
    UnitSequence s;
    s.utt_id = line.substr(0, tab);
    for (const auto& tok : split(line.substr(tab + 1), ' ')) {
      if (tok.empty()) continue;
      const long long v = parse_int(tok, origin + ":" + std::to_string(lineno));
      if (v < 0 || v > std::numeric_limits<int>::max()) {
        throw IoError(origin + ":" + std::to_string(lineno) + ": unit " + tok + " out of range");
      }
      s.units.push_back(static_cast<int>(v));
    }
    s.deduplicated = origin.ends_with(".dedup.units");
    out.push_back(std::move(s));
  }
  return out;
}

void write_units(const std::string& path, const std::vector<UnitSequence>& seqs) {
  write_text_file(path, format_units(seqs));
}

std::vector<UnitSequence> read_units(const std::string& path) {
  return parse_units(read_text_file(path), path);
}

std::string dedup_units_path(const std::string& path) {
  const std::string suffix = ".units";
  if (path.ends_with(".dedup.units")) return path;
  if (path.ends_with(suffix)) return path.substr(0, path.size() - suffix.size()) + ".dedup.units";
  return path + ".dedup.units";
}

}  // namespace rdu::quant
