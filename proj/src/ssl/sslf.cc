// rdu/src/ssl/sslf.cc

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

#include "rdu/ssl/sslf.h"

#include <bit>
#include <cstring>
#include <limits>

#include "rdu/util/common.h"

namespace rdu::ssl {

namespace {

constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw SslfError(SslfError::Kind::kDimensionOverflow,
                    std::string("encode_sslf: ") + what + " does not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

std::string encode_sslf(const LayerStackFeatures& features) {
  features.validate();
  std::string out = "SSLF";
  put_u32(out, kVersion);
  put_u32(out, checked_u32(features.num_layers(), "layer count"));
  put_u32(out, checked_u32(features.num_frames(), "frame count"));
  put_u32(out, checked_u32(features.dim(), "dimension"));
  out.reserve(out.size() + 4 * features.num_layers() * features.num_frames() * features.dim());
  for (const auto& layer : features.layers) {
    for (double v : layer.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

LayerStackFeatures decode_sslf(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "SSLF") != 0) {
    throw SslfError(SslfError::Kind::kBadMagic, origin + ": bad magic (not an SSLF file)");
  }
  if (bytes.size() < kHeaderBytes) {
    throw SslfError(SslfError::Kind::kTruncated, origin + ": truncated header");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kVersion) {
    throw SslfError(SslfError::Kind::kBadVersion,
                    origin + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t l = get_u32(bytes, 8), t = get_u32(bytes, 12), d = get_u32(bytes, 16);
  if (l == 0 || t == 0 || d == 0) {
    throw SslfError(SslfError::Kind::kMalformed, origin + ": zero dimension in header");
  }
  // l*t fits in 64 bits; the second product may not.
  const std::uint64_t lt = l * t;
  if (d > std::numeric_limits<std::uint64_t>::max() / 4 / lt ||
      lt * d * 4 > std::numeric_limits<std::size_t>::max() - kHeaderBytes) {
    throw SslfError(SslfError::Kind::kDimensionOverflow,
                    origin + ": dimensions " + std::to_string(l) + "x" + std::to_string(t) + "x" +
                        std::to_string(d) + " overflow");
  }
  const std::uint64_t count = lt * d;
  const std::uint64_t need = kHeaderBytes + 4 * count;
  if (bytes.size() < need) {
    throw SslfError(SslfError::Kind::kTruncated,
                    origin + ": truncated payload (" + std::to_string(bytes.size()) + " of " +
                        std::to_string(need) + " bytes)");
  }
  if (bytes.size() > need) {
    throw SslfError(SslfError::Kind::kMalformed, origin + ": trailing bytes after payload");
  }
  LayerStackFeatures f;
  std::size_t pos = kHeaderBytes;
  for (std::uint64_t i = 0; i < l; ++i) {
    Tensor layer = Tensor::matrix(t, d);
    for (double& v : layer.values()) {
      v = std::bit_cast<float>(get_u32(bytes, pos));
      pos += 4;
    }
    f.layers.push_back(std::move(layer));
  }
  f.validate();
  return f;
}

void dump_features(const LayerStackFeatures& features, const std::string& path) {
  write_text_file(path, encode_sslf(features));
}

LayerStackFeatures load_features(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_text_file(path);
  } catch (const Error& e) {
    throw SslfError(SslfError::Kind::kIo, e.what());
  }
  return decode_sslf(bytes, path);
}

}  // namespace rdu::ssl
