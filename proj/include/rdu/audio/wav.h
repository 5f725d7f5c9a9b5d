// rdu/include/rdu/audio/wav.h

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

#ifndef RDU_AUDIO_WAV_H_
#define RDU_AUDIO_WAV_H_

#include <string>

#include "rdu/audio/waveform.h"
#include "rdu/util/error.h"

namespace rdu::audio {

// Only 16 kHz mono PCM16 RIFF/WAVE is accepted; every other layout is
// rejected with its own kind.
class WavError : public IoError {
 public:
  enum class Kind { kIo, kMalformedHeader, kUnsupportedEncoding, kUnsupportedChannels, kUnsupportedRate };
  WavError(Kind kind, const std::string& msg) : IoError(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

Waveform read_wav(const std::string& path);
Waveform parse_wav(const std::string& bytes, const std::string& origin = "<memory>");

// Clamps to [-1, 1], rounds to the nearest 16-bit level, writes a canonical
// 44-byte-header PCM16 mono file.
void write_wav(const Waveform& w, const std::string& path);
std::string encode_wav(const Waveform& w);

}  // namespace rdu::audio

#endif  // RDU_AUDIO_WAV_H_
