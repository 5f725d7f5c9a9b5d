// rdu/include/rdu/denoiser/train.h

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

#ifndef RDU_DENOISER_TRAIN_H_
#define RDU_DENOISER_TRAIN_H_

#include <functional>
#include <string>
#include <vector>

#include "rdu/denoiser/decode.h"
#include "rdu/denoiser/model.h"
#include "rdu/tensor/optim.h"

namespace rdu::denoiser {

struct EpochLog {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_uer = 0.0;
};

// "epoch<TAB>train_loss<TAB>valid_loss<TAB>valid_uer"
std::string format_log_line(const EpochLog& e);
EpochLog parse_log_line(const std::string& line);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 16;
  tensor::ScheduleConfig schedule;
  tensor::AdamConfig adam;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  BeamConfig valid_beam{4, 0.3, 0};
  int threads = 1;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_valid_uer = 0.0;
  long long steps = 0;
};

// Seeded shuffled mini-batches; each example gets its own tape and the
// per-example gradients are averaged in batch order. The parameters with
// the lowest validation UER (ties: lower validation loss, then earlier) are
// left in the model.
TrainResult train_denoiser(DenoiserModel& model, const std::vector<TrainingExample>& train,
                           const std::vector<TrainingExample>& valid, const TrainConfig& config);

// Evaluation-mode mean hybrid loss.
double mean_loss(const DenoiserModel& model, const std::vector<TrainingExample>& examples,
                 int threads = 1);

std::vector<std::vector<int>> decode_all(const DenoiserModel& model,
                                         const std::vector<TrainingExample>& examples,
                                         const BeamConfig& beam, int threads = 1);

// Pooled UER (percent) of decoded output against the example targets.
double corpus_uer(const DenoiserModel& model, const std::vector<TrainingExample>& examples,
                  const BeamConfig& beam, int threads = 1);

struct FinetuneConfig {
  int steps = 100;
  int batch_size = 16;
  double lr = 3e-4;
  tensor::AdamConfig adam;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Parameters updated by finetune_encoder: encoder, input projection and
// layer-weight logits.
bool is_encoder_param(const std::string& name);

// Fresh Adam on the encoder-side parameters only; everything else keeps
// its exact bits.
void finetune_encoder(DenoiserModel& model, const std::vector<TrainingExample>& data,
                      const FinetuneConfig& config);

}  // namespace rdu::denoiser

#endif  // RDU_DENOISER_TRAIN_H_
