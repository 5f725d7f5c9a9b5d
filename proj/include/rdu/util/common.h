// rdu/include/rdu/util/common.h

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

#ifndef RDU_UTIL_COMMON_H_
#define RDU_UTIL_COMMON_H_

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace rdu {

using Rng = std::mt19937_64;

// Stable 64-bit FNV-1a; std::hash is not stable across implementations.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0);

// RNG seeded from (seed, key); used so per-utterance randomness does not
// depend on processing order.
Rng make_rng(std::uint64_t seed, std::string_view key);

// Hex SHA-256 of a byte string / a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);
double parse_double(std::string_view s, const std::string& what);
long long parse_int(std::string_view s, const std::string& what);
std::uint64_t parse_uint64(std::string_view s, const std::string& what);

std::string read_text_file(const std::string& path);
// Writes via a temporary file and rename so readers never see partial files.
void write_text_file(const std::string& path, std::string_view contents);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
// processed exactly once; callers write results into slot i so the gathered
// order never depends on scheduling.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace rdu

#endif  // RDU_UTIL_COMMON_H_
