// rdu/tools/rdu_main.cc

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

// rdu: drive the unit-denoising pipeline from one config file.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdu/pipeline/config.h"
#include "rdu/pipeline/pipeline.h"
#include "rdu/pipeline/run_manifest.h"
#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kStale = 3, kNumerical = 4 };

struct Globals {
  std::string config_path;
  std::string workdir = ".";
  long long seed_override = -1;
  int threads = 0;
  bool force = false;
};

rdu::pipeline::PipelineConfig load(const Globals& g) {
  if (g.config_path.empty()) throw rdu::ConfigError("--config: required");
  auto c = rdu::pipeline::load_config(g.config_path);
  if (g.seed_override >= 0) c.run.seed = static_cast<std::uint64_t>(g.seed_override);
  if (g.threads > 0) c.run.threads = g.threads;
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rdu: discrete speech unit denoising toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Pipeline config file");
  app.add_option("--workdir", g.workdir, "Pipeline directory");
  app.add_option("--seed-override", g.seed_override, "Replace run.seed");
  app.add_option("--threads", g.threads, "Replace run.threads");
  app.add_flag("--force", g.force, "Rerun stages even when up to date");

  std::vector<std::string> stages = rdu::pipeline::stage_names();
  for (const auto& s : stages) app.add_subcommand(s, "Run the " + s + " stage");
  app.add_subcommand("run", "Run every stage from synth to report");

  auto* ablate = app.add_subcommand("ablate", "Train and compare denoiser variants");
  std::vector<std::string> variants;
  ablate->add_option("--variants", variants, "Comma-separated variant names")->delimiter(',');

  // eval also works on arbitrary unit files.
  auto* eval = app.get_subcommand("eval");
  std::string hyp, ref, manifest, out;
  eval->add_option("--hyp", hyp, "Hypothesis unit file (standalone mode)");
  eval->add_option("--ref", ref, "Reference unit file (standalone mode)");
  eval->add_option("--manifest", manifest, "Augmented manifest giving conditions");
  eval->add_option("--out", out, "Write the records here");

  auto* show = app.add_subcommand("show-config", "Print the fully expanded config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (show->parsed()) {
      std::cout << rdu::pipeline::format_config(load(g));
      return kOk;
    }
    if (eval->parsed() && (!hyp.empty() || !ref.empty())) {
      if (hyp.empty() || ref.empty()) throw rdu::ConfigError("eval: --hyp and --ref go together");
      auto r = rdu::pipeline::evaluate_unit_files(hyp, ref, manifest);
      std::cout << r.table();
      if (!out.empty()) rdu::write_text_file(out, r.records());
      return kOk;
    }
    auto config = load(g);
    rdu::pipeline::WorkdirLock lock(g.workdir);
    rdu::pipeline::Pipeline p(config, g.workdir, std::cerr);
    p.set_force(g.force);
    if (app.get_subcommand("run")->parsed()) {
      p.run_all();
    } else if (ablate->parsed()) {
      p.ablate(variants.empty() ? config.ablate.variants : variants);
    } else {
      for (const auto& s : stages)
        if (app.get_subcommand(s)->parsed()) p.run_stage(s);
    }
    return kOk;
  } catch (const rdu::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const rdu::StaleInputError& e) {
    std::cerr << "stale input: " << e.what() << "\n";
    return kStale;
  } catch (const rdu::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
