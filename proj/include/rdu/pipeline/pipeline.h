// rdu/include/rdu/pipeline/pipeline.h

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

#ifndef RDU_PIPELINE_PIPELINE_H_
#define RDU_PIPELINE_PIPELINE_H_

#include <chrono>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rdu/denoiser/train.h"
#include "rdu/metrics/metrics.h"
#include "rdu/pipeline/config.h"
#include "rdu/pipeline/run_manifest.h"
#include "rdu/quantizer/kmeans.h"

namespace rdu::pipeline {

// Stage names in pipeline order (ablate is separate).
const std::vector<std::string>& stage_names();

// One entry of the adaptation series.
struct AdaptPoint {
  int recordings = 0;
  double uer = 0.0;
  double std = 0.0;
  std::size_t ref_units = 0;
};

// UER (percent) per bucket name: clean, noise_h, noise_l, reverb, plus
// "noise" (both noise buckets pooled) and "overall".
using BucketUer = std::map<std::string, double>;
BucketUer bucket_uer(const std::vector<metrics::EvalPair>& pairs);

struct EvalSummary {
  BucketUer raw;       // quantised distorted features vs clean units
  BucketUer denoised;  // denoiser output vs clean units
};

struct AblationRow {
  std::string variant;
  std::size_t parameters = 0;
  BucketUer uer;
};

// Drives the stages inside one workdir. Every stage checks that its inputs
// still carry the hashes recorded by the stage that wrote them, skips work
// whose inputs, config and outputs are unchanged (unless force is set), and
// records its own inputs and outputs in run_manifest.json.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::string workdir, std::ostream& log);

  const PipelineConfig& config() const { return config_; }
  const std::string& workdir() const { return workdir_; }
  std::string path(const std::string& rel) const;
  void set_force(bool force) { force_ = force; }

  void synth();
  void augment();
  void extract();
  void train_kmeans();
  void quantize();
  void train_denoiser();
  void decode();
  void eval();
  void adapt();
  void report();
  void ablate(const std::vector<std::string>& variants);
  // synth through report.
  void run_all();
  void run_stage(const std::string& name);

  // Training/validation/test examples of an augmented split, with targets
  // taken from the clean deduplicated units of each source utterance.
  std::vector<denoiser::TrainingExample> load_examples(const std::string& split) const;

  RunManifest manifest() const;

 private:
  struct StageIo {
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, producing stage)
    std::vector<std::string> outputs;
    std::vector<std::string> sections;  // config sections read
  };
  // False when the recorded run is still valid and nothing has to be done.
  bool begin(const std::string& stage, const StageIo& io);
  void finish(const std::string& stage, const StageIo& io);
  std::map<std::string, InputRecord> check_inputs(const std::string& stage, const StageIo& io) const;

  PipelineConfig config_;
  std::string workdir_;
  std::ostream& log_;
  bool force_ = false;
  std::map<std::string, InputRecord> pending_inputs_;
  std::chrono::steady_clock::time_point stage_start_;
};

// Condition report from a hypothesis and a reference unit file; conditions
// come from an augmented manifest when given (ids missing there count as
// clean). Both sides are deduplicated before scoring.
metrics::ConditionReport evaluate_unit_files(const std::string& hyp_path, const std::string& ref_path,
                                             const std::string& manifest_path = "");

EvalSummary read_eval_summary(const std::string& path);
std::vector<AdaptPoint> read_adapt_series(const std::string& path);
std::vector<AblationRow> read_ablation(const std::string& path);

// Least-squares slope of uer against the number of recordings.
double adapt_slope(const std::vector<AdaptPoint>& series);

}  // namespace rdu::pipeline

#endif  // RDU_PIPELINE_PIPELINE_H_
