// rdu/include/rdu/pipeline/run_manifest.h

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

#ifndef RDU_PIPELINE_RUN_MANIFEST_H_
#define RDU_PIPELINE_RUN_MANIFEST_H_

#include <map>
#include <string>

namespace rdu::pipeline {

struct InputRecord {
  std::string hash;
  std::string stage;  // producing stage; empty for files outside the pipeline
};

struct StageRecord {
  std::string config_digest;  // sha256 of the config keys the stage reads
  std::map<std::string, InputRecord> inputs;
  std::map<std::string, std::string> outputs;  // path -> hash
};

// Per-stage provenance, stored as JSON in <workdir>/run_manifest.json.
// Paths are relative to the workdir; a trailing '/' marks a directory whose
// hash covers every file below it.
struct RunManifest {
  std::map<std::string, StageRecord> stages;

  const StageRecord* find(const std::string& stage) const;
  std::string to_json() const;
  static RunManifest from_json(const std::string& text, const std::string& origin);
  // Missing file -> empty manifest.
  static RunManifest load(const std::string& path);
  void save(const std::string& path) const;
};

// sha256 of a file, or for "dir/" of the sorted "relpath<TAB>sha256" lines
// of every regular file under it.
std::string content_hash(const std::string& path);

// Advisory exclusive lock on <workdir>/.rdu.lock, released on destruction.
class WorkdirLock {
 public:
  explicit WorkdirLock(const std::string& workdir);
  ~WorkdirLock();
  WorkdirLock(const WorkdirLock&) = delete;
  WorkdirLock& operator=(const WorkdirLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace rdu::pipeline

#endif  // RDU_PIPELINE_RUN_MANIFEST_H_
