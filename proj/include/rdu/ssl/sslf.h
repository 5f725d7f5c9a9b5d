// rdu/include/rdu/ssl/sslf.h

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

#ifndef RDU_SSL_SSLF_H_
#define RDU_SSL_SSLF_H_

#include <string>

#include "rdu/ssl/pseudo_ssl.h"
#include "rdu/util/error.h"

namespace rdu::ssl {

// Feature dump: "SSLF", u32 version (1), u32 L+1, u32 T, u32 D, then
// (L+1)*T*D float32 little endian, layer-major then time-major.
class SslfError : public IoError {
 public:
  enum class Kind { kIo, kBadMagic, kBadVersion, kTruncated, kDimensionOverflow, kMalformed };
  SslfError(Kind kind, const std::string& msg) : IoError(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string encode_sslf(const LayerStackFeatures& features);
LayerStackFeatures decode_sslf(const std::string& bytes, const std::string& origin = "<memory>");

void dump_features(const LayerStackFeatures& features, const std::string& path);
LayerStackFeatures load_features(const std::string& path);

}  // namespace rdu::ssl

#endif  // RDU_SSL_SSLF_H_
