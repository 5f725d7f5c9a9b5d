// rdu/include/rdu/tensor/checkpoint.h

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

#ifndef RDU_TENSOR_CHECKPOINT_H_
#define RDU_TENSOR_CHECKPOINT_H_

#include <string>
#include <vector>

#include "rdu/tensor/tape.h"

namespace rdu::tensor {

// Named-tensor container:
//   DNZR v1
//   # <header line>            (zero or more, free-form key=value)
//   name<TAB>shape<TAB>base64(float64 LE payload)
// Shapes are written as 3x4 ("scalar" for rank 0).
struct Checkpoint {
  std::vector<std::string> header;
  ParameterStore params;
};

std::string serialize_checkpoint(const ParameterStore& params,
                                 const std::vector<std::string>& header = {});
Checkpoint parse_checkpoint(const std::string& text);

void write_checkpoint(const std::string& path, const ParameterStore& params,
                      const std::vector<std::string>& header = {});
Checkpoint read_checkpoint(const std::string& path);

}  // namespace rdu::tensor

#endif  // RDU_TENSOR_CHECKPOINT_H_
