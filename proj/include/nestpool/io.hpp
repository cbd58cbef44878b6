// Copyright 2026 The nestpool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nestpool/hiding_trainer.hpp"
#include "nestpool/model.hpp"
#include "nestpool/param_pool.hpp"

namespace nestpool {

// Binary checkpoint layout, shared by models, pools and raw tensors:
//
//   "MTRK1"                          5 bytes
//   header length                    u32, little endian
//   header                           UTF-8 "key=value\n" lines
//   arrays                           float64, little endian, canonical order
//   checksum                         u64 LE, FNV-1a over header length,
//                                    header and arrays
//
// Model headers carry `arch` and `counts`, pool headers `sizes`, tensor
// headers `shape`. All carry `format=1` and `type`.
inline constexpr std::string_view kCheckpointMagic = "MTRK1";
inline constexpr int kCheckpointVersion = 1;

std::string encode_model(const Model& model);
Model decode_model(std::string_view bytes);
std::string encode_pool(const ParamPool& pool);
ParamPool decode_pool(std::string_view bytes);

struct Tensor {
  std::vector<std::size_t> shape;  // shape[0] rows, the rest flattened into columns
  Matrix data;
};

std::string encode_tensor(const Tensor& tensor);
Tensor decode_tensor(std::string_view bytes);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);
void save_pool(const ParamPool& pool, const std::filesystem::path& path);
ParamPool load_pool(const std::filesystem::path& path);
void save_tensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor load_tensor(const std::filesystem::path& path);

// Short plain-text record, one key=value per line.
std::string format_key(const SecretKey& key);
SecretKey parse_key(std::string_view text);
void save_key(const SecretKey& key, const std::filesystem::path& path);
SecretKey load_key(const std::filesystem::path& path);

// Run log as JSON lines: one record per (epoch, task), one snapshot line per
// epoch and a closing termination line.
std::string format_run_log(const RunLog& log);
RunLog parse_run_log(std::string_view text);
void save_run_log(const RunLog& log, const std::filesystem::path& path);
RunLog load_run_log(const std::filesystem::path& path);

// Binary 8-bit PGM (P5), row-major, values in [0, 1] scaled to 0..255.
void write_pgm(std::span<const double> pixels, std::size_t height, std::size_t width,
               const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

std::string format_counts(const KindCounts& counts);
KindCounts parse_counts(std::string_view text);

}  // namespace nestpool
