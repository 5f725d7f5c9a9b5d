// rdu/include/rdu/util/error.h

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

#ifndef RDU_UTIL_ERROR_H_
#define RDU_UTIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace rdu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or unreadable file, failed write.
class IoError : public Error {
 public:
  using Error::Error;
};

// Shape or dimension mismatch; the message names the offending op.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value; the message carries the field path.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An upstream artifact is missing or its content no longer matches the hash
// recorded when the downstream stage consumed it.
class StaleInputError : public Error {
 public:
  using Error::Error;
};

// NaN/inf where finite values are required, or an optimisation diverged.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace rdu

#endif  // RDU_UTIL_ERROR_H_
