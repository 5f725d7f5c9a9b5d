// rdu/src/denoiser/train.cc

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

#include "rdu/denoiser/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdu/metrics/metrics.h"
#include "rdu/util/common.h"

namespace rdu::denoiser {

std::string format_log_line(const EpochLog& e) {
  return std::to_string(e.epoch) + "\t" + format_double(e.train_loss) + "\t" +
         format_double(e.valid_loss) + "\t" + format_double(e.valid_uer);
}

EpochLog parse_log_line(const std::string& line) {
  auto f = split(trim(line), '\t');
  if (f.size() != 4) throw IoError("training log: expected 4 columns in '" + line + "'");
  EpochLog e;
  e.epoch = static_cast<int>(parse_int(f[0], "epoch"));
  e.train_loss = parse_double(f[1], "train_loss");
  e.valid_loss = parse_double(f[2], "valid_loss");
  e.valid_uer = parse_double(f[3], "valid_uer");
  return e;
}

namespace {

// Per-example gradients summed in index order, then divided by n.
tensor::GradientMap batch_gradient(const DenoiserModel& model,
                                   const std::vector<const TrainingExample*>& batch,
                                   std::uint64_t seed, long long step, int threads,
                                   double* mean_loss_out) {
  std::vector<tensor::GradientMap> grads(batch.size());
  std::vector<double> losses(batch.size());
  parallel_for(batch.size(), threads, [&](std::size_t j) {
    Tape tape;
    Rng rng = make_rng(seed, "dropout-" + std::to_string(step) + "-" + std::to_string(j));
    LossParts parts = model.hybrid_loss(tape, *batch[j], true, &rng);
    losses[j] = parts.total.value().item();
    grads[j] = tape.backward(parts.total);
  });
  tensor::GradientMap total = std::move(grads[0]);
  for (std::size_t j = 1; j < grads.size(); ++j) {
    for (auto& [name, g] : grads[j]) {
      auto& acc = total.at(name).values();
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
    }
  }
  const double inv = 1.0 / double(batch.size());
  for (auto& [name, g] : total) {
    for (double& v : g.values()) v *= inv;
    if (!g.all_finite()) throw NumericalError("training: non-finite gradient for '" + name + "'");
  }
  double sum = 0.0;
  for (double l : losses) sum += l;
  *mean_loss_out = sum * inv;
  if (!std::isfinite(*mean_loss_out)) throw NumericalError("training: non-finite loss");
  return total;
}

}  // namespace

double mean_loss(const DenoiserModel& model, const std::vector<TrainingExample>& examples,
                 int threads) {
  if (examples.empty()) throw Error("mean_loss: no examples");
  std::vector<double> losses(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    Tape tape(false);
    losses[i] = model.hybrid_loss(tape, examples[i]).total.value().item();
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / double(examples.size());
}

std::vector<std::vector<int>> decode_all(const DenoiserModel& model,
                                         const std::vector<TrainingExample>& examples,
                                         const BeamConfig& beam, int threads) {
  std::vector<std::vector<int>> out(examples.size());
  parallel_for(examples.size(), threads,
               [&](std::size_t i) { out[i] = decode_units(model, examples[i].features, beam); });
  return out;
}

double corpus_uer(const DenoiserModel& model, const std::vector<TrainingExample>& examples,
                  const BeamConfig& beam, int threads) {
  auto hyps = decode_all(model, examples, beam, threads);
  metrics::AlignmentCounts total;
  for (std::size_t i = 0; i < examples.size(); ++i) total += metrics::uer_counts(hyps[i], examples[i].target);
  return 100.0 * double(total.errors()) / double(total.ref_length);
}

TrainResult train_denoiser(DenoiserModel& model, const std::vector<TrainingExample>& train,
                           const std::vector<TrainingExample>& valid, const TrainConfig& config) {
  if (train.empty()) throw Error("train_denoiser: empty training set");
  if (valid.empty()) throw Error("train_denoiser: empty validation set");
  if (config.batch_size < 1) throw ConfigError("train.batch_size: must be positive");
  if (config.epochs < 0) throw ConfigError("train.epochs: must be non-negative");
  for (const auto* set : {&train, &valid}) {
    for (const auto& ex : *set) {
      if (ex.target.empty()) throw Error("train_denoiser: example '" + ex.id + "' has no target");
    }
  }

  TrainResult result;
  tensor::AdamState adam;
  auto evaluate = [&](int epoch, double train_loss) {
    EpochLog e;
    e.epoch = epoch;
    e.train_loss = train_loss;
    e.valid_loss = mean_loss(model, valid, config.threads);
    e.valid_uer = corpus_uer(model, valid, config.valid_beam, config.threads);
    result.log.push_back(e);
    if (config.on_epoch) config.on_epoch(e);
    return e;
  };

  EpochLog best = evaluate(0, mean_loss(model, train, config.threads));
  ParameterStore best_params = model.params();
  std::vector<std::size_t> order(train.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(config.seed, "shuffle-" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<const TrainingExample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      double batch_loss = 0.0;
      tensor::GradientMap grads =
          batch_gradient(model, batch, config.seed, result.steps, config.threads, &batch_loss);
      tensor::clip_grad_norm(grads, config.clip_norm);
      ++result.steps;
      tensor::adam_step(model.params(), grads, adam, tensor::lr_at_step(config.schedule, result.steps),
                        config.adam);
      loss_sum += batch_loss;
      ++batches;
    }
    EpochLog e = evaluate(epoch, loss_sum / double(batches));
    if (e.valid_uer < best.valid_uer ||
        (e.valid_uer == best.valid_uer && e.valid_loss < best.valid_loss)) {
      best = e;
      best_params = model.params();
    }
  }
  model.params() = best_params;
  result.best_epoch = best.epoch;
  result.best_valid_uer = best.valid_uer;
  return result;
}

bool is_encoder_param(const std::string& name) {
  return name.rfind("enc.", 0) == 0 || name.rfind("proj.", 0) == 0 || name.rfind("ws.", 0) == 0;
}

void finetune_encoder(DenoiserModel& model, const std::vector<TrainingExample>& data,
                      const FinetuneConfig& config) {
  if (data.empty()) throw Error("finetune_encoder: empty adaptation set");
  if (config.steps < 0) throw ConfigError("adapt.steps: must be non-negative");
  if (config.batch_size < 1) throw ConfigError("adapt.batch_size: must be positive");
  if (config.steps == 0) return;
  std::vector<bool> saved;
  for (const auto& p : model.params().params()) saved.push_back(p.trainable);
  model.params().set_trainable(is_encoder_param);
  try {
    tensor::AdamState adam;
    std::vector<std::size_t> order;
    Rng rng = make_rng(config.seed, "finetune");
    std::size_t cursor = 0;
    for (int step = 0; step < config.steps; ++step) {
      std::vector<const TrainingExample*> batch;
      while (static_cast<int>(batch.size()) < config.batch_size) {
        if (cursor == order.size()) {
          order.resize(data.size());
          std::iota(order.begin(), order.end(), 0);
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        batch.push_back(&data[order[cursor++]]);
        if (batch.size() == data.size()) break;
      }
      double loss = 0.0;
      tensor::GradientMap grads = batch_gradient(model, batch, config.seed ^ 0x5eed, step,
                                                 config.threads, &loss);
      tensor::clip_grad_norm(grads, config.clip_norm);
      tensor::adam_step(model.params(), grads, adam, config.lr, config.adam);
    }
  } catch (...) {
    std::size_t i = 0;
    for (auto& p : model.params().params()) p.trainable = saved[i++];
    throw;
  }
  std::size_t i = 0;
  for (auto& p : model.params().params()) p.trainable = saved[i++];
}

}  // namespace rdu::denoiser
