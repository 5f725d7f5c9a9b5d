// rdu/tests/unit/pipeline_test.cc

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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rdu/pipeline/config.h"
#include "rdu/pipeline/pipeline.h"
#include "rdu/pipeline/run_manifest.h"
#include "rdu/quantizer/kmeans.h"
#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace fs = std::filesystem;
using namespace rdu;
using namespace rdu::pipeline;

namespace {

// Small enough for a full run in a few seconds.
const char* kTinyConfig = R"(
run.seed = 11
corpus.num_utterances = 14
corpus.num_unit_types = 3
corpus.units_per_utterance = 3
corpus.valid_utterances = 3
corpus.test_utterances = 3
augment.test_snr_grid = 5,20
augment.noise_tags = stationary
augment.num_irs = 1
augment.noise_seconds = 3
ssl.num_layers = 2
ssl.dim = 8
ssl.n_mels = 16
quantizer.k = 4
quantizer.restarts = 1
denoiser.encoder_layers = 1
denoiser.decoder_layers = 1
denoiser.model_dim = 8
denoiser.heads = 2
denoiser.ffn_dim = 16
denoiser.dropout = 0
train.epochs = 1
train.batch_size = 4
train.warmup_steps = 2
train.valid_beam = 2
decode.beam_size = 2
adapt.n_recordings = 2
adapt.recording_len_s = 2
adapt.utterances_per_recording = 3
adapt.steps = 2
adapt.batch_size = 2
ablate.epochs = 1
)";

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string& name) {
    dir = fs::temp_directory_path() / ("rdu_pipeline_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string str() const { return dir.string(); }
};

std::string config_error(const std::string& text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RDU_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config text round trip is a fixed point") {
  const auto c = parse_config(kTinyConfig);
  const std::string once = format_config(c);
  const std::string twice = format_config(parse_config(once));
  CHECK(once == twice);
  CHECK(c.corpus.num_utterances == 14);
  CHECK(c.augment.test_snr_grid == std::vector<double>{5.0, 20.0});
  CHECK(c.seed() == 11);
  // Every key appears exactly once.
  for (const auto& k : config_keys()) CHECK(("\n" + once).find("\n" + k + " = ") != std::string::npos);
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error("run.seed = 1\nbogus.key = 3\n").find("bogus.key") != std::string::npos);
  CHECK(config_error("run.seed = 1\nrun.seed = 2\n").find("t.cfg:2") != std::string::npos);
  CHECK(config_error("run.seed = 1\nquantizer.k = abc\n").find("quantizer.k") != std::string::npos);
  CHECK(config_error("run.seed = 1\nno equals sign\n").find("t.cfg:2") != std::string::npos);

  auto c = parse_config("quantizer.k = 4\n");
  CHECK_THROWS_AS(c.validate(), ConfigError);  // no seed
  c.run.seed = 3;
  c.quantizer.k = 0;
  try {
    c.validate();
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("quantizer.k") != std::string::npos);
  }
  c.quantizer.k = 4;
  c.denoiser.variant = "nonsense";
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("derived seeds are distinct per purpose and follow run.seed") {
  auto a = parse_config("run.seed = 1\n"), b = parse_config("run.seed = 2\n");
  CHECK(a.derived_seed("x") != a.derived_seed("y"));
  CHECK(a.derived_seed("x") != b.derived_seed("x"));
  CHECK(a.derived_seed("x") == parse_config("run.seed = 1\n").derived_seed("x"));
  CHECK(*parse_config("run.seed = 18446744073709551615\n").run.seed == 18446744073709551615ull);
  CHECK_THROWS_AS(parse_config("run.seed = -1\n"), ConfigError);
}

TEST_CASE("config digest only covers the requested sections") {
  auto a = parse_config(kTinyConfig), b = a;
  b.decode.beam_size = 7;
  CHECK(config_digest(a, {"quantizer"}) == config_digest(b, {"quantizer"}));
  CHECK(config_digest(a, {"decode"}) != config_digest(b, {"decode"}));
  b = a;
  b.run.seed = 12;
  CHECK(config_digest(a, {"quantizer"}) != config_digest(b, {"quantizer"}));
}

TEST_CASE("run manifest json round trip") {
  RunManifest m;
  m.stages["quantize"].config_digest = "abc";
  m.stages["quantize"].inputs["feats/train/"] = {"h1", "extract"};
  m.stages["quantize"].inputs["/abs/ext.txt"] = {"h2", ""};
  m.stages["quantize"].outputs["units/train.units"] = "h3";
  const auto back = RunManifest::from_json(m.to_json(), "mem");
  CHECK(back.to_json() == m.to_json());
  REQUIRE(back.find("quantize"));
  CHECK(back.find("quantize")->inputs.at("feats/train/").stage == "extract");
  CHECK(back.find("synth") == nullptr);
  CHECK_THROWS_AS(RunManifest::from_json("{not json", "mem"), IoError);

  TempDir t("manifest");
  CHECK(RunManifest::load(t.str() + "/missing.json").stages.empty());
  m.save(t.str() + "/m.json");
  CHECK(RunManifest::load(t.str() + "/m.json").to_json() == m.to_json());
}

TEST_CASE("content hash of files and directories") {
  TempDir t("hash");
  write_text_file(t.str() + "/a.txt", "abc");
  // sha256("abc")
  CHECK(content_hash(t.str() + "/a.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::create_directories(t.dir / "d" / "sub");
  write_text_file((t.dir / "d" / "x").string(), "1");
  write_text_file((t.dir / "d" / "sub" / "y").string(), "2");
  const std::string h1 = content_hash(t.str() + "/d/");
  write_text_file((t.dir / "d" / "sub" / "y").string(), "3");
  const std::string h2 = content_hash(t.str() + "/d/");
  CHECK(h1 != h2);
  write_text_file((t.dir / "d" / "sub" / "y").string(), "2");
  CHECK(content_hash(t.str() + "/d/") == h1);
  CHECK_THROWS(content_hash(t.str() + "/nothing"));
}

TEST_CASE("workdir lock is exclusive") {
  TempDir t("lock");
  {
    WorkdirLock first(t.str());
    CHECK_THROWS_AS(WorkdirLock(t.str()), Error);
  }
  CHECK_NOTHROW(WorkdirLock(t.str()));
}

TEST_CASE("stage with missing upstream is stale") {
  TempDir t("stale0");
  std::ostringstream log;
  Pipeline p(parse_config(kTinyConfig), t.str(), log);
  CHECK_THROWS_AS(p.augment(), StaleInputError);
  CHECK_THROWS_AS(p.quantize(), StaleInputError);
}

TEST_CASE("full tiny run: skip, staleness, idempotence, ablation") {
  TempDir t("full");
  const auto config = parse_config(kTinyConfig);
  std::ostringstream log;
  Pipeline p(config, t.str(), log);
  p.run_all();
  for (const char* f : {"corpus/train.manifest", "quant/codebook.kmns", "units/clean.dedup.units",
                        "denoiser/model.ckpt", "denoiser/train.log", "decode/test.dedup.units",
                        "eval/table.txt", "eval/summary.json", "adapt/series.tsv", "report/report.txt"})
    CHECK_MESSAGE(fs::exists(t.dir / f), f);

  const auto summary = read_eval_summary(p.path("eval/summary.json"));
  CHECK(summary.raw.count("overall"));
  CHECK(summary.denoised.count("overall"));
  const auto series = read_adapt_series(p.path("adapt/series.tsv"));
  REQUIRE(series.size() == 3);
  CHECK(series[0].recordings == 0);
  CHECK(series[2].recordings == 2);

  SUBCASE("second run skips every stage") {
    std::ostringstream log2;
    Pipeline again(config, t.str(), log2);
    again.run_all();
    std::size_t skipped = 0;
    for (std::size_t pos = 0; (pos = log2.str().find("up to date", pos)) != std::string::npos; ++pos) ++skipped;
    CHECK(skipped == stage_names().size());
    CHECK(log2.str().find("running") == std::string::npos);
  }

  SUBCASE("forced rerun is byte-identical") {
    const auto before = p.manifest().to_json();
    const std::string units = read_text_file(p.path("decode/test.dedup.units"));
    std::ostringstream log2;
    Pipeline again(config, t.str(), log2);
    again.set_force(true);
    again.run_all();
    CHECK(p.manifest().to_json() == before);
    CHECK(read_text_file(p.path("decode/test.dedup.units")) == units);
  }

  SUBCASE("rewritten upstream output makes downstream stale") {
    write_text_file(p.path("units/clean.dedup.units"), "tampered\n");
    std::ostringstream log2;
    Pipeline again(config, t.str(), log2);
    try {
      again.train_denoiser();
      FAIL("expected StaleInputError");
    } catch (const StaleInputError& e) {
      CHECK(std::string(e.what()).find("quantize") != std::string::npos);
    }
    // Rerunning the producer repairs it.
    again.set_force(true);
    again.quantize();
    again.set_force(false);
    CHECK_NOTHROW(again.train_denoiser());
  }

  SUBCASE("rerun of an upstream stage with new config invalidates downstream") {
    auto changed = config;
    changed.quantizer.k = 3;
    std::ostringstream log2;
    Pipeline again(changed, t.str(), log2);
    again.train_kmeans();
    CHECK_THROWS_AS(again.train_denoiser(), StaleInputError);
  }

  SUBCASE("config change reruns only the stages that read it") {
    auto changed = config;
    changed.adapt.lr = 1e-3;
    std::ostringstream log2;
    Pipeline again(changed, t.str(), log2);
    again.run_all();
    CHECK(log2.str().find("[train_denoiser] up to date") != std::string::npos);
    CHECK(log2.str().find("[decode] up to date") != std::string::npos);
    CHECK(log2.str().find("[adapt] running") != std::string::npos);
    CHECK(log2.str().find("[report] running") != std::string::npos);
  }

  SUBCASE("eval of a reference against itself is all zero") {
    const auto r = evaluate_unit_files(p.path("units/clean.dedup.units"), p.path("units/clean.dedup.units"));
    CHECK(r.overall.uer == 0.0);
    CHECK(r.overall.counts.errors() == 0);
  }

  SUBCASE("single-variant ablation gives one row") {
    p.ablate({"encoder_only"});
    const auto rows = read_ablation(p.path("ablate/ablation.json"));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].variant == "encoder_only");
    CHECK(rows[0].parameters > 0);
    CHECK(rows[0].uer.count("overall"));
    CHECK_THROWS_AS(p.ablate({"no_such_variant"}), ConfigError);
  }
}

TEST_CASE("adaptation slope") {
  CHECK(adapt_slope({{0, 10.0}, {1, 8.0}, {2, 6.0}}) == doctest::Approx(-2.0));
  CHECK(adapt_slope({{0, 5.0}}) == 0.0);
}

TEST_CASE("cli exit codes") {
  TempDir t("cli");
  write_text_file(t.str() + "/bad.cfg", "run.seed = 1\nwhat.ever = 2\n");
  write_text_file(t.str() + "/tiny.cfg", kTinyConfig);
  write_text_file(t.str() + "/u.units", "a\t1 1 2\nb\t3\n");
  CHECK(run_cli("--config " + t.str() + "/bad.cfg show-config") == 2);
  CHECK(run_cli("--no-such-flag show-config") == 2);
  CHECK(run_cli("--config " + t.str() + "/tiny.cfg show-config") == 0);
  CHECK(run_cli("--config " + t.str() + "/tiny.cfg --workdir " + t.str() + "/wd quantize") == 3);
  CHECK(run_cli("eval --hyp " + t.str() + "/u.units --ref " + t.str() + "/u.units") == 0);
  CHECK(run_cli("eval --hyp " + t.str() + "/u.units") == 2);
}
