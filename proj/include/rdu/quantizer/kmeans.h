// rdu/include/rdu/quantizer/kmeans.h

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

#ifndef RDU_QUANTIZER_KMEANS_H_
#define RDU_QUANTIZER_KMEANS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rdu/ssl/pseudo_ssl.h"
#include "rdu/tensor/tensor.h"

namespace rdu::quant {

using tensor::Tensor;

struct KmeansMeta {
  std::uint64_t seed = 0;
  int iterations = 0;
  // Inertia after every assignment step; the last entry belongs to the
  // returned centroids.
  std::vector<double> inertia_trace;
};

struct Codebook {
  Tensor centroids;  // K x D
  int layer_index = 0;
  KmeansMeta meta;

  std::size_t k() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
  // K >= 2, finite, pairwise distinct centroids.
  void validate() const;
};

struct KmeansOptions {
  int k = 16;
  int max_iters = 100;
  double tol = 1e-6;  // mean centroid shift
  int restarts = 1;   // best inertia wins; restart r uses seed + r
  std::uint64_t seed = 0;
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters are moved
// to the point farthest from its centroid. Once Lloyd settles, single-point
// transfers between clusters are tried and Lloyd resumes if any helps.
Codebook train_kmeans(const Tensor& features, const KmeansOptions& options, int layer_index = 0);

// Sum over rows of the squared distance to the nearest centroid.
double inertia(const Tensor& features, const Codebook& codebook);

// Random row subset (at least one row) of the stacked per-utterance frames.
Tensor sample_frames(const std::vector<Tensor>& per_utterance, double fraction,
                     std::uint64_t seed);

struct UnitSequence {
  std::string utt_id;
  std::vector<int> units;
  bool deduplicated = false;

  friend bool operator==(const UnitSequence&, const UnitSequence&) = default;
};

// Nearest centroid per row; ties go to the smaller index.
UnitSequence assign(const Tensor& features, const Codebook& codebook, std::string utt_id = "");
// Same as assign on features.layers[layer_index], refusing a codebook
// trained on another layer.
UnitSequence assign_layer(const ssl::LayerStackFeatures& features, int layer_index,
                          const Codebook& codebook, std::string utt_id = "");

std::vector<int> deduplicate(const std::vector<int>& units);
UnitSequence deduplicate(const UnitSequence& seq);

// Codebook file: "KMNS v1\n", u32 K, u32 D, u32 layer, K*D float32 LE.
std::string encode_codebook(const Codebook& codebook);
Codebook decode_codebook(const std::string& bytes, const std::string& origin = "<memory>");
void write_codebook(const std::string& path, const Codebook& codebook);
Codebook read_codebook(const std::string& path);

// Unit files: "utt_id<TAB>u1 u2 ..." per line.
std::string format_units(const std::vector<UnitSequence>& seqs);
std::vector<UnitSequence> parse_units(const std::string& text, const std::string& origin);
void write_units(const std::string& path, const std::vector<UnitSequence>& seqs);
std::vector<UnitSequence> read_units(const std::string& path);
// "x.units" -> "x.dedup.units".
std::string dedup_units_path(const std::string& path);

}  // namespace rdu::quant

#endif  // RDU_QUANTIZER_KMEANS_H_
