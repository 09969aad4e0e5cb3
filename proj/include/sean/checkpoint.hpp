/*
 * Copyright 2026 The SEAN Authors. All Rights Reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sean/nn/layers.hpp"

namespace sean {

inline constexpr int kCheckpointFormatVersion = 1;

struct StoredTensor {
  std::string name;
  std::vector<Index> shape;
  std::vector<float> values;
};

struct Checkpoint {
  std::string kind;  // "alignment" or "segmentation"
  nlohmann::json config;
  std::vector<StoredTensor> tensors;
};

/// Layout: the 8 bytes "SEANCKPT", a little-endian uint64 header length, a
/// JSON header (format_version, kind, config, tensor table), then the raw
/// float32 little-endian payload.
std::string encode_checkpoint(const std::string& kind, const nlohmann::json& config,
                              const nn::ParamRefs<float>& params);
Checkpoint decode_checkpoint(const std::string& bytes, const std::string& source = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const nlohmann::json& config,
                     const nn::ParamRefs<float>& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored tensors into `params` by name. Throws Config when a
/// tensor is missing or a dimension disagrees, naming the dimension.
void restore_parameters(const Checkpoint& ckpt, const nn::ParamRefs<float>& params);

}  // namespace sean
