/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <filesystem>
#include <string>

#include "binorm/model.hpp"
#include "binorm/optimizer.hpp"

namespace binorm {

/// Everything needed to resume or evaluate a run.
struct Checkpoint {
  ModelSpec spec;
  ModelParams params;
  AdamState optimizer;
  int epoch = 0;
  double horizon_scale = 1.0;
  bool partial = false;
  std::string config_hash;
};

/// Binary layout: magic, version, spec echo (JSON), tensors (name, shape, raw
/// little-endian doubles) for parameters and both Adam moments, step counters,
/// then a CRC-32 of everything before it.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);

/// Throws ChecksumError on a CRC mismatch or truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const std::string& text);

/// CRC-32 of the bytes, lowercase hex.
std::string crc32_hex(std::string_view bytes);

}  // namespace binorm
