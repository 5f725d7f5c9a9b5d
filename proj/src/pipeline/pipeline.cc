// rdu/src/pipeline/pipeline.cc

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

#include "rdu/pipeline/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <set>

#include "json.hpp"
#include "rdu/audio/manifest.h"
#include "rdu/audio/wav.h"
#include "rdu/augment/augment.h"
#include "rdu/denoiser/decode.h"
#include "rdu/ssl/sslf.h"
#include "rdu/util/common.h"

namespace rdu::pipeline {

namespace fs = std::filesystem;
using audio::ManifestEntry;
using denoiser::TrainingExample;
using nlohmann::json;
using tensor::Tensor;

namespace {

const std::vector<std::string> kSplits = {"train", "valid", "test"};

std::string corpus_manifest(const std::string& split) { return "corpus/" + split + ".manifest"; }
std::string aug_manifest(const std::string& split) { return "aug/" + split + "/augmented.manifest"; }
std::string aug_wav(const std::string& split) { return "aug/" + split + "/wav/"; }
std::string feat_dir(const std::string& set) { return "feats/" + set + "/"; }
std::string units_file(const std::string& set) { return "units/" + set + ".units"; }
const char kCleanUnits[] = "units/clean.dedup.units";
const char kCodebook[] = "quant/codebook.kmns";
const char kModel[] = "denoiser/model.ckpt";
const char kHyp[] = "decode/test.dedup.units";
const char kEvalTable[] = "eval/table.txt";
const char kEvalSummary[] = "eval/summary.json";
const char kAdaptSeries[] = "adapt/series.tsv";
const char kAblation[] = "ablate/ablation.json";
const char kAblationTable[] = "ablate/table.txt";

std::string fmt(double v, int digits = 2) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::map<std::string, std::vector<int>> units_by_id(const std::string& path) {
  std::map<std::string, std::vector<int>> m;
  for (auto& s : quant::read_units(path)) m[s.utt_id] = quant::deduplicate(s.units);
  return m;
}

std::string source_of(const ManifestEntry& e) { return e.aug ? e.aug->source_utt_id : e.id; }

// Float32 storage round trip, so in-memory features match what extract writes.
ssl::LayerStackFeatures as_stored(const ssl::LayerStackFeatures& f) {
  return ssl::decode_sslf(ssl::encode_sslf(f));
}

metrics::EvalPair make_pair(const ManifestEntry& e, std::vector<int> hyp, std::vector<int> ref) {
  return {e.id, e.condition, std::move(hyp), std::move(ref)};
}

std::vector<int> lookup(const std::map<std::string, std::vector<int>>& m, const std::string& id,
                        const std::string& what) {
  auto it = m.find(id);
  if (it == m.end()) throw Error(what + ": no units for '" + id + "'");
  return it->second;
}

std::string bucket_header() {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-26s %16s %16s %16s %16s %16s\n", "", "Clean", "Noise-H", "Noise-L",
                "Reverb", "Overall");
  return buf;
}

std::string bucket_row(const std::string& label, const metrics::ConditionReport& r) {
  auto cell = [](const metrics::ReportCell& c) {
    return c.present() ? fmt(c.uer) + " +/- " + fmt(c.std) : std::string("-");
  };
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%-26s %16s %16s %16s %16s %16s\n", label.c_str(),
                cell(r.cell(metrics::Bucket::kClean)).c_str(),
                cell(r.cell(metrics::Bucket::kNoiseH)).c_str(),
                cell(r.cell(metrics::Bucket::kNoiseL)).c_str(),
                cell(r.cell(metrics::Bucket::kReverb)).c_str(), cell(r.overall).c_str());
  return buf;
}

denoiser::BeamConfig beam_for(const denoiser::DenoiserModel& model, denoiser::BeamConfig beam) {
  // A decoder trained without the CTC objective has an untrained CTC head.
  if (model.config().ctc_weight == 0.0) beam.ctc_weight = 0.0;
  return beam;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"synth",          "augment", "extract", "train_kmeans",
                                                 "quantize",       "train_denoiser", "decode",  "eval",
                                                 "adapt",          "report"};
  return names;
}

BucketUer bucket_uer(const std::vector<metrics::EvalPair>& pairs) {
  BucketUer out;
  if (pairs.empty()) return out;
  auto r = metrics::condition_report(pairs);
  for (auto b : metrics::kBuckets)
    if (r.cell(b).present()) out[metrics::bucket_name(b)] = r.cell(b).uer;
  metrics::AlignmentCounts noise = r.cell(metrics::Bucket::kNoiseH).counts;
  noise += r.cell(metrics::Bucket::kNoiseL).counts;
  if (noise.ref_length > 0) out["noise"] = 100.0 * double(noise.errors()) / double(noise.ref_length);
  out["overall"] = r.overall.uer;
  return out;
}

Pipeline::Pipeline(PipelineConfig config, std::string workdir, std::ostream& log)
    : config_(std::move(config)), workdir_(std::move(workdir)), log_(log) {
  config_.validate();
}

std::string Pipeline::path(const std::string& rel) const {
  if (fs::path(rel).is_absolute()) return rel;
  return (fs::path(workdir_) / rel).string();
}

RunManifest Pipeline::manifest() const { return RunManifest::load(path("run_manifest.json")); }

std::map<std::string, InputRecord> Pipeline::check_inputs(const std::string& stage,
                                                          const StageIo& io) const {
  const RunManifest m = manifest();
  std::set<std::string> verified;
  // A producer is stale when one of its own inputs was rewritten after it ran.
  std::function<void(const std::string&)> fresh = [&](const std::string& producer) {
    if (!verified.insert(producer).second) return;
    const StageRecord* rec = m.find(producer);
    for (const auto& [p, in] : rec->inputs) {
      if (in.stage.empty()) continue;
      const StageRecord* up = m.find(in.stage);
      bool ok = false;
      if (up) {
        auto it = up->outputs.find(p);
        ok = it != up->outputs.end() && it->second == in.hash;
      }
      if (!ok) {
        throw StaleInputError(stage + ": upstream stage '" + producer + "' is stale (its input '" + p +
                              "' was rewritten by '" + in.stage + "'); rerun '" + producer + "'");
      }
      fresh(in.stage);
    }
  };
  std::map<std::string, InputRecord> out;
  for (const auto& [p, producer] : io.inputs) {
    const std::string abs = path(p);
    if (producer.empty()) {
      if (!fs::exists(abs)) throw StaleInputError(stage + ": input '" + p + "' does not exist");
      out[p] = {content_hash(abs), ""};
      continue;
    }
    const StageRecord* rec = m.find(producer);
    if (!rec || !rec->outputs.count(p)) {
      throw StaleInputError(stage + ": input '" + p + "' comes from stage '" + producer +
                            "', which has not been run");
    }
    if (!fs::exists(abs)) {
      throw StaleInputError(stage + ": input '" + p + "' is missing; rerun '" + producer + "'");
    }
    const std::string h = content_hash(abs);
    if (h != rec->outputs.at(p)) {
      throw StaleInputError(stage + ": input '" + p + "' no longer matches the hash recorded by '" +
                            producer + "'; rerun '" + producer + "'");
    }
    fresh(producer);
    out[p] = {h, producer};
  }
  return out;
}

bool Pipeline::begin(const std::string& stage, const StageIo& io) {
  pending_inputs_ = check_inputs(stage, io);
  const std::string digest = sha256_hex(config_digest(config_, io.sections));
  const RunManifest m = manifest();
  if (const StageRecord* rec = m.find(stage); rec && !force_) {
    bool same = rec->config_digest == digest && rec->outputs.size() == io.outputs.size() &&
                rec->inputs.size() == pending_inputs_.size();
    for (const auto& [p, in] : pending_inputs_) {
      auto it = rec->inputs.find(p);
      same = same && it != rec->inputs.end() && it->second.hash == in.hash && it->second.stage == in.stage;
    }
    for (const auto& o : io.outputs) {
      auto it = rec->outputs.find(o);
      same = same && it != rec->outputs.end() && fs::exists(path(o)) && content_hash(path(o)) == it->second;
    }
    if (same) {
      log_ << "[" << stage << "] up to date\n";
      return false;
    }
  }
  for (const auto& o : io.outputs)
    if (o.back() == '/') fs::remove_all(path(o));
  log_ << "[" << stage << "] running\n";
  stage_start_ = std::chrono::steady_clock::now();
  return true;
}

void Pipeline::finish(const std::string& stage, const StageIo& io) {
  StageRecord rec;
  rec.config_digest = sha256_hex(config_digest(config_, io.sections));
  rec.inputs = pending_inputs_;
  for (const auto& o : io.outputs) {
    if (!fs::exists(path(o))) throw IoError(stage + ": expected output '" + o + "' was not written");
    rec.outputs[o] = content_hash(path(o));
  }
  RunManifest m = manifest();
  m.stages[stage] = std::move(rec);
  m.save(path("run_manifest.json"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - stage_start_).count();
  log_ << "[" << stage << "] done in " << fmt(secs, 1) << " s\n";
}

void Pipeline::synth() {
  const auto& c = config_.corpus;
  const bool synthetic = c.source == "synth";
  StageIo io;
  io.sections = {"corpus"};
  for (const auto& s : kSplits) io.outputs.push_back(corpus_manifest(s));
  if (synthetic) {
    io.outputs.push_back("corpus/wav/");
    io.outputs.push_back("corpus/scripts.txt");
  } else {
    io.inputs.push_back({fs::absolute(c.manifest).string(), ""});
  }
  if (!begin("synth", io)) return;

  std::vector<ManifestEntry> all;
  if (synthetic) {
    auto corpus = augment::synth_corpus(
        {c.num_utterances, c.num_unit_types, c.units_per_utterance, config_.derived_seed("synth")});
    std::string scripts;
    fs::create_directories(path("corpus/wav"));
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
      const auto& u = corpus.utterances[i];
      audio::write_wav(u.waveform, path("corpus/wav/" + u.id + ".wav"));
      all.push_back({u.id, "wav/" + u.id + ".wav", audio::Condition::clean(), std::nullopt});
      scripts += u.id + "\t";
      for (std::size_t j = 0; j < corpus.scripts[i].size(); ++j)
        scripts += (j ? " " : "") + std::to_string(corpus.scripts[i][j]);
      scripts += "\n";
    }
    write_text_file(path("corpus/scripts.txt"), scripts);
  } else {
    const std::string src = fs::absolute(c.manifest).string();
    for (auto e : audio::read_manifest(src)) {
      e.wav_path = audio::resolve_path(src, e.wav_path);
      e.condition = audio::Condition::clean();
      e.aug.reset();
      all.push_back(std::move(e));
    }
    if (static_cast<int>(all.size()) <= c.valid_utterances + c.test_utterances) {
      throw ConfigError("corpus.manifest: " + std::to_string(all.size()) +
                        " utterances do not cover valid_utterances + test_utterances");
    }
  }
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(config_.derived_seed("split"), "split");
  std::shuffle(order.begin(), order.end(), rng);
  std::map<std::string, std::vector<ManifestEntry>> splits;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int r = static_cast<int>(i);
    const std::string s = r < c.test_utterances                        ? "test"
                          : r < c.test_utterances + c.valid_utterances ? "valid"
                                                                       : "train";
    splits[s].push_back(all[order[i]]);
  }
  for (const auto& s : kSplits) {
    auto& v = splits[s];
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    audio::write_manifest(path(corpus_manifest(s)), v);
  }
  finish("synth", io);
}

void Pipeline::augment() {
  const bool synthetic = config_.corpus.source == "synth";
  StageIo io;
  io.sections = {"augment"};
  for (const auto& s : kSplits) {
    io.inputs.push_back({corpus_manifest(s), "synth"});
    io.outputs.push_back(aug_manifest(s));
    io.outputs.push_back(aug_wav(s));
  }
  if (synthetic) io.inputs.push_back({"corpus/wav/", "synth"});
  if (!begin("augment", io)) return;

  const auto& a = config_.augment;
  auto bank = [&](const std::string& key) {
    augment::NoiseBank full = augment::synth_noise_bank(config_.derived_seed(key), a.noise_seconds);
    augment::NoiseBank b;
    for (const auto& t : a.noise_tags) b.sources.push_back(*full.find(t));
    return b;
  };
  // Test noises and IRs are fresh instances that training never saw.
  const augment::NoiseBank train_noise = bank("noise-train"), test_noise = bank("noise-test");
  const auto train_irs = augment::synth_ir_bank(config_.derived_seed("ir-train"), a.num_irs);
  const auto test_irs = augment::synth_ir_bank(config_.derived_seed("ir-test"), a.num_irs);

  for (const auto& s : kSplits) {
    augment::Recipe r = s == "train"   ? augment::train_recipe(config_.derived_seed("aug-train"))
                        : s == "valid" ? augment::validation_recipe(config_.derived_seed("aug-valid"))
                                       : augment::test_recipe(config_.derived_seed("aug-test"));
    r.snr_low_db = a.snr_low_db;
    r.snr_high_db = a.snr_high_db;
    if (s == "test") r.snr_grid = a.test_snr_grid;
    r.noise_tags = a.noise_tags;
    const std::string src = path(corpus_manifest(s));
    auto entries = augment::augment_corpus(audio::read_manifest(src), src, r,
                                           s == "test" ? test_noise : train_noise,
                                           s == "test" ? test_irs : train_irs, path("aug/" + s),
                                           {config_.run.threads});
    audio::write_manifest(path(aug_manifest(s)), entries);
    log_ << "[augment] " << s << ": " << entries.size() << " utterances\n";
  }
  finish("augment", io);
}

void Pipeline::extract() {
  const bool synthetic = config_.corpus.source == "synth";
  StageIo io;
  io.sections = {"ssl"};
  for (const auto& s : kSplits) {
    io.inputs.push_back({corpus_manifest(s), "synth"});
    io.inputs.push_back({aug_manifest(s), "augment"});
    io.inputs.push_back({aug_wav(s), "augment"});
    io.outputs.push_back(feat_dir(s));
  }
  if (synthetic) io.inputs.push_back({"corpus/wav/", "synth"});
  io.outputs.push_back(feat_dir("clean"));
  if (!begin("extract", io)) return;

  const ssl::PseudoEncoder enc(config_.encoder_config());
  auto run = [&](const std::string& manifest_rel, const std::string& set) {
    const std::string mpath = path(manifest_rel);
    const auto entries = audio::read_manifest(mpath);
    fs::create_directories(path(feat_dir(set)));
    parallel_for(entries.size(), config_.run.threads, [&](std::size_t i) {
      const auto w = audio::read_wav(audio::resolve_path(mpath, entries[i].wav_path));
      ssl::dump_features(enc.extract(w), path(feat_dir(set) + entries[i].id + ".sslf"));
    });
    return entries.size();
  };
  std::size_t clean = 0;
  for (const auto& s : kSplits) clean += run(corpus_manifest(s), "clean");
  log_ << "[extract] clean: " << clean << " utterances\n";
  for (const auto& s : kSplits) log_ << "[extract] " << s << ": " << run(aug_manifest(s), s) << " utterances\n";
  finish("extract", io);
}

void Pipeline::train_kmeans() {
  StageIo io;
  io.sections = {"quantizer"};
  io.inputs = {{corpus_manifest("train"), "synth"}, {feat_dir("clean"), "extract"}};
  io.outputs = {kCodebook, "quant/kmeans.log"};
  if (!begin("train_kmeans", io)) return;

  const auto& q = config_.quantizer;
  const int layer = config_.cluster_layer();
  const auto entries = audio::read_manifest(path(corpus_manifest("train")));
  std::vector<Tensor> per_utt(entries.size());
  parallel_for(entries.size(), config_.run.threads, [&](std::size_t i) {
    per_utt[i] = ssl::select_layer(ssl::load_features(path(feat_dir("clean") + entries[i].id + ".sslf")), layer);
  });
  const Tensor frames = quant::sample_frames(per_utt, q.subset_fraction, config_.derived_seed("kmeans-sample"));
  quant::KmeansOptions opt;
  opt.k = q.k;
  opt.max_iters = q.max_iters;
  opt.tol = q.tol;
  opt.restarts = q.restarts;
  opt.seed = config_.derived_seed("kmeans");
  const quant::Codebook cb = quant::train_kmeans(frames, opt, layer);
  quant::write_codebook(path(kCodebook), cb);
  std::string logtext = "k\t" + std::to_string(cb.k()) + "\nlayer\t" + std::to_string(layer) +
                        "\nframes\t" + std::to_string(frames.rows()) + "\nseed\t" +
                        std::to_string(cb.meta.seed) + "\niterations\t" +
                        std::to_string(cb.meta.iterations) + "\ninertia_trace\t";
  for (std::size_t i = 0; i < cb.meta.inertia_trace.size(); ++i)
    logtext += (i ? " " : "") + format_double(cb.meta.inertia_trace[i]);
  write_text_file(path("quant/kmeans.log"), logtext + "\n");
  log_ << "[train_kmeans] K=" << cb.k() << " layer=" << layer << " frames=" << frames.rows()
       << " inertia=" << format_double(cb.meta.inertia_trace.back()) << "\n";
  finish("train_kmeans", io);
}

void Pipeline::quantize() {
  StageIo io;
  io.inputs = {{kCodebook, "train_kmeans"}, {feat_dir("clean"), "extract"}};
  io.outputs = {units_file("clean"), quant::dedup_units_path(units_file("clean"))};
  for (const auto& s : kSplits) {
    io.inputs.push_back({corpus_manifest(s), "synth"});
    io.inputs.push_back({aug_manifest(s), "augment"});
    io.inputs.push_back({feat_dir(s), "extract"});
    io.outputs.push_back(units_file(s));
    io.outputs.push_back(quant::dedup_units_path(units_file(s)));
  }
  if (!begin("quantize", io)) return;

  const quant::Codebook cb = quant::read_codebook(path(kCodebook));
  auto run = [&](const std::vector<ManifestEntry>& entries, const std::string& set,
                 const std::string& feats) {
    std::vector<quant::UnitSequence> seqs(entries.size()), dedup(entries.size());
    parallel_for(entries.size(), config_.run.threads, [&](std::size_t i) {
      seqs[i] = quant::assign_layer(ssl::load_features(path(feat_dir(feats) + entries[i].id + ".sslf")),
                                    cb.layer_index, cb, entries[i].id);
      dedup[i] = quant::deduplicate(seqs[i]);
    });
    quant::write_units(path(units_file(set)), seqs);
    quant::write_units(path(quant::dedup_units_path(units_file(set))), dedup);
  };
  std::vector<ManifestEntry> clean;
  for (const auto& s : kSplits) {
    auto e = audio::read_manifest(path(corpus_manifest(s)));
    clean.insert(clean.end(), e.begin(), e.end());
  }
  std::sort(clean.begin(), clean.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  run(clean, "clean", "clean");
  for (const auto& s : kSplits) run(audio::read_manifest(path(aug_manifest(s))), s, s);
  finish("quantize", io);
}

std::vector<TrainingExample> Pipeline::load_examples(const std::string& split) const {
  const auto entries = audio::read_manifest(path(aug_manifest(split)));
  const auto clean = units_by_id(path(kCleanUnits));
  std::vector<TrainingExample> out(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    out[i].id = entries[i].id;
    out[i].condition = entries[i].condition;
    out[i].target = lookup(clean, source_of(entries[i]), "clean targets");
    if (out[i].target.empty()) throw Error("clean targets: empty unit sequence for '" + source_of(entries[i]) + "'");
  }
  parallel_for(entries.size(), config_.run.threads, [&](std::size_t i) {
    out[i].features = ssl::load_features(path(feat_dir(split) + entries[i].id + ".sslf"));
  });
  return out;
}

void Pipeline::train_denoiser() {
  StageIo io;
  io.sections = {"denoiser", "train", "decode", "ssl", "quantizer"};
  io.inputs = {{kCleanUnits, "quantize"}};
  for (const auto& s : {"train", "valid"}) {
    io.inputs.push_back({aug_manifest(s), "augment"});
    io.inputs.push_back({feat_dir(s), "extract"});
  }
  io.outputs = {kModel, "denoiser/train.log"};
  if (!begin("train_denoiser", io)) return;

  const auto train = load_examples("train"), valid = load_examples("valid");
  denoiser::DenoiserModel model(config_.denoiser_config());
  log_ << "[train_denoiser] " << model.num_parameters() << " parameters, " << train.size()
       << " training / " << valid.size() << " validation utterances\n";
  auto tc = config_.train_config();
  tc.valid_beam = beam_for(model, tc.valid_beam);
  tc.on_epoch = [&](const denoiser::EpochLog& e) {
    log_ << "[train_denoiser] " << denoiser::format_log_line(e) << "\n" << std::flush;
  };
  const auto result = denoiser::train_denoiser(model, train, valid, tc);
  std::string logtext;
  for (const auto& e : result.log) logtext += denoiser::format_log_line(e) + "\n";
  fs::create_directories(path("denoiser"));
  model.save(path(kModel));
  write_text_file(path("denoiser/train.log"), logtext);
  log_ << "[train_denoiser] best epoch " << result.best_epoch << " (valid UER "
       << fmt(result.best_valid_uer) << ")\n";
  finish("train_denoiser", io);
}

void Pipeline::decode() {
  StageIo io;
  io.sections = {"decode"};
  io.inputs = {{kModel, "train_denoiser"}, {aug_manifest("test"), "augment"}, {feat_dir("test"), "extract"}};
  io.outputs = {kHyp};
  if (!begin("decode", io)) return;

  const auto model = denoiser::DenoiserModel::load(path(kModel));
  const auto entries = audio::read_manifest(path(aug_manifest("test")));
  const auto beam = beam_for(model, config_.beam_config());
  std::vector<quant::UnitSequence> hyps(entries.size());
  parallel_for(entries.size(), config_.run.threads, [&](std::size_t i) {
    const auto f = ssl::load_features(path(feat_dir("test") + entries[i].id + ".sslf"));
    hyps[i] = {entries[i].id, denoiser::decode_units(model, f, beam), true};
  });
  quant::write_units(path(kHyp), hyps);
  finish("decode", io);
}

void Pipeline::eval() {
  StageIo io;
  io.inputs = {{kHyp, "decode"},
               {quant::dedup_units_path(units_file("test")), "quantize"},
               {kCleanUnits, "quantize"},
               {aug_manifest("test"), "augment"}};
  io.outputs = {kEvalTable, kEvalSummary, "eval/raw.records", "eval/denoised.records"};
  if (!begin("eval", io)) return;

  const auto entries = audio::read_manifest(path(aug_manifest("test")));
  const auto clean = units_by_id(path(kCleanUnits));
  const auto raw = units_by_id(path(quant::dedup_units_path(units_file("test"))));
  const auto hyp = units_by_id(path(kHyp));
  std::vector<metrics::EvalPair> raw_pairs, den_pairs;
  for (const auto& e : entries) {
    const auto ref = lookup(clean, source_of(e), "eval reference");
    raw_pairs.push_back(make_pair(e, lookup(raw, e.id, "eval raw units"), ref));
    den_pairs.push_back(make_pair(e, lookup(hyp, e.id, "eval hypothesis"), ref));
  }
  const auto raw_report = metrics::condition_report(raw_pairs);
  const auto den_report = metrics::condition_report(den_pairs);
  const std::string table = bucket_header() + bucket_row("Raw units", raw_report) +
                            bucket_row("Denoiser", den_report);
  write_text_file(path(kEvalTable), table);
  write_text_file(path("eval/raw.records"), raw_report.records());
  write_text_file(path("eval/denoised.records"), den_report.records());
  json j;
  j["raw"] = bucket_uer(raw_pairs);
  j["denoised"] = bucket_uer(den_pairs);
  write_text_file(path(kEvalSummary), j.dump(2) + "\n");
  log_ << table;
  finish("eval", io);
}

void Pipeline::adapt() {
  const bool synthetic = config_.corpus.source == "synth";
  StageIo io;
  io.sections = {"adapt", "decode", "ssl"};
  io.inputs = {{kModel, "train_denoiser"},
               {kCleanUnits, "quantize"},
               {corpus_manifest("train"), "synth"},
               {corpus_manifest("test"), "synth"}};
  if (synthetic) io.inputs.push_back({"corpus/wav/", "synth"});
  io.outputs = {kAdaptSeries, "adapt/models/"};
  if (!begin("adapt", io)) return;

  const auto& a = config_.adapt;
  const auto trained = denoiser::DenoiserModel::load(path(kModel));
  const ssl::PseudoEncoder enc(trained.config().ssl);
  const auto clean_units = units_by_id(path(kCleanUnits));
  auto load_split = [&](const std::string& s) {
    const std::string m = path(corpus_manifest(s));
    std::vector<std::pair<std::string, audio::Waveform>> out;
    for (const auto& e : audio::read_manifest(m)) out.emplace_back(e.id, audio::read_wav(audio::resolve_path(m, e.wav_path)));
    return out;
  };
  const auto train_clean = load_split("train"), test_clean = load_split("test");

  auto mixed = [&](const std::string& id, const std::string& src, const audio::Waveform& clean,
                   const audio::Waveform& noise, double snr, Rng& rng) {
    TrainingExample ex;
    ex.id = id;
    ex.features = as_stored(enc.extract(augment::mix_at_snr(clean, noise, snr, rng).mixture));
    ex.target = lookup(clean_units, src, "adapt targets");
    ex.condition = audio::Condition::noise(a.environment, snr);
    return ex;
  };

  // Held-out recording of the same environment, mixed into the test utterances.
  const auto heldout = augment::synth_environment_noise(a.environment, config_.derived_seed("adapt-heldout"),
                                                        a.recording_len_s);
  std::vector<TrainingExample> eval_set(test_clean.size());
  parallel_for(test_clean.size(), config_.run.threads, [&](std::size_t i) {
    Rng rng = make_rng(config_.derived_seed("adapt-eval"), test_clean[i].first);
    eval_set[i] = mixed(test_clean[i].first, test_clean[i].first, test_clean[i].second, heldout,
                        a.eval_snr_db, rng);
  });

  // Recording r yields utterances_per_recording mixtures of random training
  // utterances with random crops of it.
  std::vector<std::vector<TrainingExample>> per_recording;
  for (int r = 1; r <= a.n_recordings; ++r) {
    const auto rec = augment::synth_environment_noise(
        a.environment, config_.derived_seed("adapt-recording-" + std::to_string(r)), a.recording_len_s);
    std::vector<TrainingExample> set(static_cast<std::size_t>(a.utterances_per_recording));
    parallel_for(set.size(), config_.run.threads, [&](std::size_t j) {
      Rng rng = make_rng(config_.derived_seed("adapt-mix"), std::to_string(r) + ":" + std::to_string(j));
      std::uniform_int_distribution<std::size_t> pick(0, train_clean.size() - 1);
      std::uniform_real_distribution<double> snr(a.snr_low_db, a.snr_high_db);
      const auto& [src, wave] = train_clean[pick(rng)];
      const double s = snr(rng);
      set[j] = mixed("adapt" + std::to_string(r) + "-" + std::to_string(j), src, wave, rec, s, rng);
    });
    per_recording.push_back(std::move(set));
  }

  const auto beam = beam_for(trained, config_.beam_config());
  auto score = [&](const denoiser::DenoiserModel& m, int n) {
    const auto hyps = denoiser::decode_all(m, eval_set, beam, config_.run.threads);
    metrics::AlignmentCounts total;
    for (std::size_t i = 0; i < eval_set.size(); ++i) total += metrics::uer_counts(hyps[i], eval_set[i].target);
    const double p = double(total.errors()) / double(total.ref_length);
    AdaptPoint pt{n, 100.0 * p, metrics::binomial_std(std::min(p, 1.0), total.ref_length),
                  total.ref_length};
    log_ << "[adapt] " << n << " recordings: UER " << fmt(pt.uer) << "\n" << std::flush;
    return pt;
  };

  std::vector<AdaptPoint> series{score(trained, 0)};
  fs::create_directories(path("adapt/models"));
  std::vector<TrainingExample> pool;
  for (int n = 1; n <= a.n_recordings; ++n) {
    pool.insert(pool.end(), per_recording[static_cast<std::size_t>(n - 1)].begin(),
                per_recording[static_cast<std::size_t>(n - 1)].end());
    denoiser::DenoiserModel m = trained;
    denoiser::FinetuneConfig fc;
    fc.steps = a.steps;
    fc.batch_size = a.batch_size;
    fc.lr = a.lr;
    fc.seed = config_.derived_seed("adapt-finetune");
    fc.threads = config_.run.threads;
    denoiser::finetune_encoder(m, pool, fc);
    m.save(path("adapt/models/model.n" + std::to_string(n) + ".ckpt"));
    series.push_back(score(m, n));
  }
  std::string out = "# environment=" + a.environment + " eval_snr_db=" + format_double(a.eval_snr_db) +
                    "\n# recordings\tuer\tstd\tref_units\n";
  for (const auto& p : series) {
    out += std::to_string(p.recordings) + "\t" + format_double(p.uer) + "\t" + format_double(p.std) +
           "\t" + std::to_string(p.ref_units) + "\n";
  }
  write_text_file(path(kAdaptSeries), out);
  finish("adapt", io);
}

void Pipeline::ablate(const std::vector<std::string>& variants) {
  if (variants.empty()) throw ConfigError("ablate.variants: must not be empty");
  for (const auto& v : variants) denoiser::variant_config(v, config_.denoiser_config());
  config_.ablate.variants = variants;
  StageIo io;
  io.sections = {"denoiser", "train", "decode", "ssl", "quantizer", "ablate"};
  io.inputs = {{kCleanUnits, "quantize"}};
  for (const auto& s : kSplits) {
    io.inputs.push_back({aug_manifest(s), "augment"});
    io.inputs.push_back({feat_dir(s), "extract"});
  }
  io.outputs = {kAblation, kAblationTable, "ablate/models/"};
  if (!begin("ablate", io)) return;

  const auto train = load_examples("train"), valid = load_examples("valid"), test = load_examples("test");
  fs::create_directories(path("ablate/models"));
  json rows = json::array();
  std::string table;
  {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-26s %10s %10s %10s %10s %10s %10s\n", "Variant", "Params", "Clean",
                  "Noise-H", "Noise-L", "Reverb", "Overall");
    table = buf;
  }
  for (const auto& v : variants) {
    // Every variant starts from the same seeds and sees the same batches.
    denoiser::DenoiserModel model(denoiser::variant_config(v, config_.denoiser_config()));
    auto tc = config_.train_config();
    if (config_.ablate.epochs > 0) tc.epochs = config_.ablate.epochs;
    tc.valid_beam = beam_for(model, tc.valid_beam);
    tc.on_epoch = [&](const denoiser::EpochLog& e) {
      log_ << "[ablate] " << v << " " << denoiser::format_log_line(e) << "\n" << std::flush;
    };
    denoiser::train_denoiser(model, train, valid, tc);
    model.save(path("ablate/models/" + v + ".ckpt"));
    const auto hyps = denoiser::decode_all(model, test, beam_for(model, config_.beam_config()), config_.run.threads);
    std::vector<metrics::EvalPair> pairs;
    for (std::size_t i = 0; i < test.size(); ++i) pairs.push_back({test[i].id, test[i].condition, hyps[i], test[i].target});
    const BucketUer u = bucket_uer(pairs);
    rows.push_back({{"variant", v}, {"parameters", model.num_parameters()}, {"uer", u}});
    auto get = [&](const char* k) { return u.count(k) ? u.at(k) : std::nan(""); };
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%-26s %10zu %10s %10s %10s %10s %10s\n", v.c_str(), model.num_parameters(),
                  fmt(get("clean")).c_str(), fmt(get("noise_h")).c_str(), fmt(get("noise_l")).c_str(),
                  fmt(get("reverb")).c_str(), fmt(get("overall")).c_str());
    table += buf;
    log_ << "[ablate] " << v << ": overall UER " << fmt(get("overall")) << "\n";
  }
  write_text_file(path(kAblation), rows.dump(2) + "\n");
  write_text_file(path(kAblationTable), table);
  log_ << table;
  finish("ablate", io);
}

void Pipeline::report() {
  const RunManifest m = manifest();
  StageIo io;
  io.inputs = {{kEvalTable, "eval"}};
  if (m.find("adapt")) io.inputs.push_back({kAdaptSeries, "adapt"});
  if (m.find("ablate")) io.inputs.push_back({kAblationTable, "ablate"});
  io.sections = {"adapt"};
  io.outputs = {"report/report.txt"};
  if (!begin("report", io)) return;

  std::string out = "Unit error rate (%) on the test set, +/- conservative binomial std\n\n";
  out += read_text_file(path(kEvalTable));
  if (m.find("adapt")) {
    const auto series = read_adapt_series(path(kAdaptSeries));
    out += "\nTest-time adaptation: environment " + config_.adapt.environment + ", held-out noise at " +
           format_double(config_.adapt.eval_snr_db) + " dB\n";
    out += "#recordings   UER (%)\n";
    for (const auto& p : series) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%-13d %s +/- %s\n", p.recordings, fmt(p.uer).c_str(), fmt(p.std).c_str());
      out += buf;
    }
    out += "slope per recording: " + fmt(adapt_slope(series), 3) + "\n";
  }
  if (m.find("ablate")) out += "\nAblation (UER %)\n" + read_text_file(path(kAblationTable));
  write_text_file(path("report/report.txt"), out);
  log_ << out;
  finish("report", io);
}

void Pipeline::run_stage(const std::string& name) {
  if (name == "synth") synth();
  else if (name == "augment") augment();
  else if (name == "extract") extract();
  else if (name == "train_kmeans") train_kmeans();
  else if (name == "quantize") quantize();
  else if (name == "train_denoiser") train_denoiser();
  else if (name == "decode") decode();
  else if (name == "eval") eval();
  else if (name == "adapt") adapt();
  else if (name == "report") report();
  else throw ConfigError("unknown stage '" + name + "'");
}

void Pipeline::run_all() {
  for (const auto& s : stage_names()) run_stage(s);
}

metrics::ConditionReport evaluate_unit_files(const std::string& hyp_path, const std::string& ref_path,
                                             const std::string& manifest_path) {
  std::map<std::string, audio::Condition> cond;
  if (!manifest_path.empty())
    for (const auto& e : audio::read_manifest(manifest_path)) cond[e.id] = e.condition;
  const auto hyp = units_by_id(hyp_path);
  std::vector<metrics::EvalPair> pairs;
  for (const auto& ref : quant::read_units(ref_path)) {
    auto it = cond.find(ref.utt_id);
    pairs.push_back({ref.utt_id, it == cond.end() ? audio::Condition::clean() : it->second,
                     lookup(hyp, ref.utt_id, "eval hypothesis"), quant::deduplicate(ref.units)});
  }
  if (pairs.empty()) throw Error("eval: reference file '" + ref_path + "' is empty");
  return metrics::condition_report(pairs);
}

EvalSummary read_eval_summary(const std::string& path) {
  try {
    json j = json::parse(read_text_file(path));
    return {j.at("raw").get<BucketUer>(), j.at("denoised").get<BucketUer>()};
  } catch (const json::exception& e) {
    throw IoError(path + ": malformed eval summary: " + e.what());
  }
}

std::vector<AdaptPoint> read_adapt_series(const std::string& path) {
  std::vector<AdaptPoint> out;
  for (const auto& line : split(read_text_file(path), '\n')) {
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (f.size() != 4) throw IoError(path + ": expected 4 columns in '" + line + "'");
    out.push_back({static_cast<int>(parse_int(f[0], "recordings")), parse_double(f[1], "uer"),
                   parse_double(f[2], "std"), static_cast<std::size_t>(parse_int(f[3], "ref_units"))});
  }
  return out;
}

std::vector<AblationRow> read_ablation(const std::string& path) {
  std::vector<AblationRow> out;
  try {
    for (const auto& r : json::parse(read_text_file(path))) {
      out.push_back({r.at("variant").get<std::string>(), r.at("parameters").get<std::size_t>(),
                     r.at("uer").get<BucketUer>()});
    }
  } catch (const json::exception& e) {
    throw IoError(path + ": malformed ablation results: " + e.what());
  }
  return out;
}

double adapt_slope(const std::vector<AdaptPoint>& series) {
  if (series.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& p : series) mx += p.recordings, my += p.uer;
  mx /= double(series.size());
  my /= double(series.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : series) {
    sxy += (p.recordings - mx) * (p.uer - my);
    sxx += (p.recordings - mx) * (p.recordings - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace rdu::pipeline
