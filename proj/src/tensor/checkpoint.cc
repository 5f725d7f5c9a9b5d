// rdu/src/tensor/checkpoint.cc

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

#include "rdu/tensor/checkpoint.h"

#include <bit>
#include <cstring>
#include <sstream>

#include "rdu/util/common.h"
#include "rdu/util/error.h"

namespace rdu::tensor {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payloads assume a little-endian host");

std::string serialize_checkpoint(const ParameterStore& params,
                                 const std::vector<std::string>& header) {
  std::ostringstream out;
  out << "DNZR v1\n";
  for (const auto& line : header) out << "# " << line << '\n';
  for (const Parameter& p : params.params()) {
    std::string shape;
    if (p.value.rank() == 0) {
      shape = "scalar";
    } else {
      for (std::size_t i = 0; i < p.value.rank(); ++i) {
        if (i) shape += 'x';
        shape += std::to_string(p.value.dim(i));
      }
    }
    std::string bytes(p.value.size() * sizeof(double), '\0');
    std::memcpy(bytes.data(), p.value.data(), bytes.size());
    out << p.name << '\t' << shape << '\t' << base64_encode(bytes) << '\n';
  }
  return out.str();
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint ckpt;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "DNZR v1") {
    throw IoError("checkpoint: missing 'DNZR v1' header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      ckpt.header.push_back(line.substr(2));
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw IoError("checkpoint: malformed line '" + line.substr(0, 40) + "'");
    Shape shape;
    if (fields[1] != "scalar") {
      for (const auto& d : split(fields[1], 'x')) {
        shape.push_back(static_cast<std::size_t>(parse_int(d, "checkpoint shape")));
      }
    }
    std::string bytes = base64_decode(fields[2]);
    if (bytes.size() != shape_size(shape) * sizeof(double)) {
      throw IoError("checkpoint: payload size mismatch for '" + fields[0] + "'");
    }
    std::vector<double> data(shape_size(shape));
    std::memcpy(data.data(), bytes.data(), bytes.size());
    ckpt.params.add(fields[0], Tensor(shape, std::move(data)));
  }
  return ckpt;
}

void write_checkpoint(const std::string& path, const ParameterStore& params,
                      const std::vector<std::string>& header) {
  write_text_file(path, serialize_checkpoint(params, header));
}

Checkpoint read_checkpoint(const std::string& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace rdu::tensor
