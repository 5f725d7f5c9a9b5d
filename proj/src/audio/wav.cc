// rdu/src/audio/wav.cc

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

#include "rdu/audio/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rdu/util/common.h"

namespace rdu::audio {
namespace {

std::uint32_t le32(const std::string& b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

std::uint16_t le16(const std::string& b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    static_cast<unsigned char>(b[off + 1]) << 8);
}

void put32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

[[noreturn]] void fail(WavError::Kind kind, const std::string& origin, const std::string& what) {
  throw WavError(kind, origin + ": " + what);
}

}  // namespace

Waveform parse_wav(const std::string& bytes, const std::string& origin) {
  using K = WavError::Kind;
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    fail(K::kMalformedHeader, origin, "not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = le32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size()) fail(K::kMalformedHeader, origin, "truncated fmt chunk");
      const std::uint16_t format = le16(bytes, body);
      const std::uint16_t channels = le16(bytes, body + 2);
      const std::uint32_t rate = le32(bytes, body + 4);
      const std::uint16_t bits = le16(bytes, body + 14);
      if (format != 1) fail(K::kUnsupportedEncoding, origin, "audio format " + std::to_string(format) + " is not PCM");
      if (bits != 16) fail(K::kUnsupportedEncoding, origin, std::to_string(bits) + "-bit samples; only 16-bit PCM is supported");
      if (channels != 1) fail(K::kUnsupportedChannels, origin, std::to_string(channels) + " channels; only mono is supported");
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        fail(K::kUnsupportedRate, origin, std::to_string(rate) + " Hz; only 16000 Hz is supported");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) fail(K::kMalformedHeader, origin, "data chunk before fmt chunk");
      if (body + size > bytes.size()) fail(K::kMalformedHeader, origin, "truncated data chunk");
      if (size % 2 != 0) fail(K::kMalformedHeader, origin, "odd data chunk size");
      Waveform w;
      w.samples.resize(size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(le16(bytes, body + 2 * i));
        w.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return w;
    }
    pos = body + size + (size & 1);
  }
  fail(K::kMalformedHeader, origin, have_fmt ? "missing data chunk" : "missing fmt chunk");
}

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WavError(WavError::Kind::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_wav(ss.str(), path);
}

std::string encode_wav(const Waveform& w) {
  if (w.sample_rate_hz != kSampleRate) {
    throw WavError(WavError::Kind::kUnsupportedRate, "write_wav: sample rate must be 16000 Hz");
  }
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, 1);
  put16(b, 1);
  put32(b, kSampleRate);
  put32(b, kSampleRate * 2);
  put16(b, 2);
  put16(b, 16);
  b += "data";
  put32(b, data_bytes);
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw NumericalError("write_wav: non-finite sample");
    const double q = std::nearbyint(std::clamp(v, -1.0, 1.0) * 32768.0);
    put16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0))));
  }
  return b;
}

void write_wav(const Waveform& w, const std::string& path) {
  try {
    write_text_file(path, encode_wav(w));
  } catch (const WavError&) {
    throw;
  } catch (const IoError& e) {
    throw WavError(WavError::Kind::kIo, e.what());
  }
}

}  // namespace rdu::audio
