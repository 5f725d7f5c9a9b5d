// rdu/src/audio/manifest.cc

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

#include "rdu/audio/manifest.h"

#include <filesystem>
#include <set>
#include <sstream>

#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace rdu::audio {
namespace {

std::string condition_text(const Condition& c) {
  if (c.type == AugType::kNoise) return "noise:" + c.source_tag;
  return to_string(c.type);
}

std::string opt_text(const std::string& s) { return s.empty() ? "-" : s; }

std::string dash_or(const std::string& s) { return s == "-" ? std::string() : s; }

}  // namespace

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << e.id << '\t' << e.wav_path << '\t' << condition_text(e.condition) << '\t'
        << (e.condition.type == AugType::kNoise ? format_double(e.condition.snr_db) : "-");
    if (e.aug) {
      const AugmentationInfo& a = *e.aug;
      out << '\t' << a.source_utt_id << '\t' << to_string(a.aug_type) << '\t'
          << opt_text(a.noise_tag) << '\t' << (a.snr_db ? format_double(*a.snr_db) : "-") << '\t'
          << opt_text(a.ir_tag) << '\t' << (a.rescaled ? 1 : 0);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<ManifestEntry> parse_manifest(const std::string& text, const std::string& origin) {
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    auto f = split(line, '\t');
    if (f.size() != 4 && f.size() != 10) {
      throw IoError(where + ": expected 4 or 10 tab-separated fields, got " + std::to_string(f.size()));
    }
    ManifestEntry e;
    e.id = f[0];
    e.wav_path = f[1];
    if (e.id.empty()) throw IoError(where + ": empty utterance id");
    if (!seen.insert(e.id).second) throw IoError(where + ": duplicate utterance id '" + e.id + "'");
    const std::string& cond = f[2];
    if (cond.rfind("noise:", 0) == 0) {
      if (f[3] == "-") throw IoError(where + ": noise condition without snr_db");
      e.condition = Condition::noise(cond.substr(6), parse_double(f[3], where + " snr_db"));
    } else {
      try {
        e.condition.type = parse_aug_type(cond);
      } catch (const Error&) {
        throw IoError(where + ": unknown condition label '" + cond + "'");
      }
      if (e.condition.type == AugType::kNoise) throw IoError(where + ": noise condition needs a source tag");
      if (f[3] != "-") throw IoError(where + ": snr_db given for a non-noise condition");
    }
    if (f.size() == 10) {
      AugmentationInfo a;
      a.source_utt_id = f[4];
      a.aug_type = parse_aug_type(f[5]);
      a.noise_tag = dash_or(f[6]);
      if (f[7] != "-") a.snr_db = parse_double(f[7], where + " snr_db");
      a.ir_tag = dash_or(f[8]);
      a.rescaled = f[9] == "1";
      e.aug = a;
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  write_text_file(path, format_manifest(entries));
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
  return parse_manifest(read_text_file(path), path);
}

std::string resolve_path(const std::string& manifest_path, const std::string& wav_path) {
  std::filesystem::path p(wav_path);
  if (p.is_absolute()) return wav_path;
  return (std::filesystem::path(manifest_path).parent_path() / p).lexically_normal().string();
}

}  // namespace rdu::audio
