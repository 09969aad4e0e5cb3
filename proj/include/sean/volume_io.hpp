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
#include <optional>
#include <string>

#include "sean/volume.hpp"

namespace sean {

struct VolumeFiles {
  std::filesystem::path raw, sidecar, mask;
};

/// File names for volume `id` inside `dir`: <id>.raw, <id>.json, <id>.mask.raw.
VolumeFiles volume_files(const std::filesystem::path& dir, const std::string& id);

/// Writes voxels as 32-bit little-endian floats (depth-major, then row-major)
/// plus a JSON sidecar; the optional mask is written as 8-bit {0,1}.
void write_volume(const CtVolume& vol, const Mask* mask, const std::filesystem::path& dir);

struct LoadedVolume {
  CtVolume volume;
  std::optional<Mask> mask;
};

/// Reads a volume given its sidecar (<id>.json), raw file (<id>.raw) or
/// stem path. Throws Io on a malformed sidecar, unsupported dtype or a
/// payload whose size disagrees with the header.
LoadedVolume read_volume(const std::filesystem::path& path);

void write_mask(const Mask& mask, const std::filesystem::path& path);
Mask read_mask(const std::filesystem::path& path, Index depth, Index height, Index width);

}  // namespace sean
