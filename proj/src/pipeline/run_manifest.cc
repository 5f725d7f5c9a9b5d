// rdu/src/pipeline/run_manifest.cc

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

#include "rdu/pipeline/run_manifest.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace rdu::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const StageRecord* RunManifest::find(const std::string& stage) const {
  auto it = stages.find(stage);
  return it == stages.end() ? nullptr : &it->second;
}

std::string RunManifest::to_json() const {
  json j;
  j["version"] = 1;
  j["stages"] = json::object();
  for (const auto& [name, rec] : stages) {
    json s;
    s["config_digest"] = rec.config_digest;
    s["inputs"] = json::object();
    for (const auto& [path, in] : rec.inputs) s["inputs"][path] = {{"hash", in.hash}, {"stage", in.stage}};
    s["outputs"] = rec.outputs;
    j["stages"][name] = s;
  }
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text, const std::string& origin) {
  RunManifest m;
  try {
    json j = json::parse(text);
    if (j.at("version").get<int>() != 1) throw IoError(origin + ": unsupported run manifest version");
    for (const auto& [name, s] : j.at("stages").items()) {
      StageRecord rec;
      rec.config_digest = s.at("config_digest").get<std::string>();
      for (const auto& [path, in] : s.at("inputs").items()) {
        rec.inputs[path] = {in.at("hash").get<std::string>(), in.at("stage").get<std::string>()};
      }
      rec.outputs = s.at("outputs").get<std::map<std::string, std::string>>();
      m.stages[name] = std::move(rec);
    }
  } catch (const json::exception& e) {
    throw IoError(origin + ": malformed run manifest: " + e.what());
  }
  return m;
}

RunManifest RunManifest::load(const std::string& path) {
  if (!fs::exists(path)) return {};
  return from_json(read_text_file(path), path);
}

void RunManifest::save(const std::string& path) const { write_text_file(path, to_json()); }

std::string content_hash(const std::string& path) {
  if (!path.empty() && path.back() == '/') {
    const fs::path root(path);
    if (!fs::is_directory(root)) throw IoError("'" + path + "' is not a directory");
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).generic_string());
    }
    std::sort(files.begin(), files.end());
    std::string listing;
    for (const auto& f : files) listing += f + "\t" + sha256_file((root / f).string()) + "\n";
    return sha256_hex(listing);
  }
  return sha256_file(path);
}

WorkdirLock::WorkdirLock(const std::string& workdir) {
  fs::create_directories(workdir);
  const std::string path = (fs::path(workdir) / ".rdu.lock").string();
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open lock file '" + path + "': " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error("workdir '" + workdir + "' is in use by another rdu invocation");
  }
}

WorkdirLock::~WorkdirLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace rdu::pipeline
