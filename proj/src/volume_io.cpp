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

#include "sean/volume_io.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"

#include "sean/error.hpp"
#include "sean/fsutil.hpp"

namespace sean {

namespace fs = std::filesystem;
using nlohmann::json;

VolumeFiles volume_files(const fs::path& dir, const std::string& id) {
  return {dir / (id + ".raw"), dir / (id + ".json"), dir / (id + ".mask.raw")};
}

namespace {

std::string encode_f32le(const Volume<float>& v) {
  std::string bytes(static_cast<std::size_t>(v.size()) * 4, '\0');
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(bytes.data(), v.data(), bytes.size());
  } else {
    for (Index i = 0; i < v.size(); ++i) {
      const auto u = std::bit_cast<std::uint32_t>(v.data()[i]);
      for (int b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((u >> (8 * b)) & 0xFF);
    }
  }
  return bytes;
}

void decode_f32le(const std::string& bytes, Volume<float>& v) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(v.data(), bytes.data(), bytes.size());
  } else {
    for (Index i = 0; i < v.size(); ++i) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b) u |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
      v.data()[i] = std::bit_cast<float>(u);
    }
  }
}

fs::path stem_of(const fs::path& path) {
  const std::string s = path.string();
  for (const char* suffix : {".mask.raw", ".json", ".raw"}) {
    const std::string suf(suffix);
    if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0)
      return fs::path(s.substr(0, s.size() - suf.size()));
  }
  return path;
}

}  // namespace

void write_mask(const Mask& mask, const fs::path& path) {
  std::string bytes(static_cast<std::size_t>(mask.size()), '\0');
  for (Index i = 0; i < mask.size(); ++i) bytes[i] = mask.data()[i] ? 1 : 0;
  write_file_atomic(path, bytes);
}

Mask read_mask(const fs::path& path, Index depth, Index height, Index width) {
  const std::string bytes = read_file(path);
  const auto expected = static_cast<std::size_t>(depth * height * width);
  if (bytes.size() < expected)
    fail(ErrorKind::Io, "truncated mask file " + path.string() + ": expected " + std::to_string(expected) +
                            " bytes, found " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    fail(ErrorKind::Io, "mask file " + path.string() + " is larger than its header dims");
  Mask mask(depth, height, width);
  for (std::size_t i = 0; i < expected; ++i) {
    const auto b = static_cast<unsigned char>(bytes[i]);
    if (b > 1) fail(ErrorKind::Io, "mask file " + path.string() + " contains values other than 0/1");
    mask.data()[i] = b;
  }
  return mask;
}

void write_volume(const CtVolume& vol, const Mask* mask, const fs::path& dir) {
  vol.validate();
  require(!vol.id.empty(), "write_volume: volume id is empty");
  if (mask != nullptr) require(mask->same_dims(vol.voxels), "write_volume: mask shape differs from volume");
  const VolumeFiles files = volume_files(dir, vol.id);
  json header = {{"dims", {vol.voxels.depth(), vol.voxels.height(), vol.voxels.width()}},
                 {"spacing", {vol.spacing[0], vol.spacing[1], vol.spacing[2]}},
                 {"dtype", "f32le"},
                 {"id", vol.id}};
  write_file_atomic(files.raw, encode_f32le(vol.voxels));
  if (mask != nullptr) write_mask(*mask, files.mask);
  write_file_atomic(files.sidecar, header.dump(2) + "\n");
}

LoadedVolume read_volume(const fs::path& path) {
  const fs::path stem = stem_of(path);
  fs::path sidecar = stem;
  sidecar += ".json";
  fs::path raw = stem;
  raw += ".raw";
  fs::path mask_path = stem;
  mask_path += ".mask.raw";

  json header;
  try {
    header = json::parse(read_file(sidecar));
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  LoadedVolume out;
  Index d = 0, h = 0, w = 0;
  try {
    const auto dims = header.at("dims");
    if (!dims.is_array() || dims.size() != 3) fail(ErrorKind::Io, "sidecar " + sidecar.string() + ": dims must be [D,H,W]");
    d = dims[0].get<Index>();
    h = dims[1].get<Index>();
    w = dims[2].get<Index>();
    const auto spacing = header.at("spacing");
    if (!spacing.is_array() || spacing.size() != 3)
      fail(ErrorKind::Io, "sidecar " + sidecar.string() + ": spacing must be [dz,dy,dx]");
    for (int i = 0; i < 3; ++i) out.volume.spacing[i] = spacing[i].get<double>();
    const auto dtype = header.at("dtype").get<std::string>();
    if (dtype != "f32le") fail(ErrorKind::Io, "sidecar " + sidecar.string() + ": unsupported dtype '" + dtype + "'");
    out.volume.id = header.at("id").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed sidecar " + sidecar.string() + ": " + e.what());
  }
  if (d < 1 || h < 1 || w < 1) fail(ErrorKind::Io, "sidecar " + sidecar.string() + ": dims must be positive");

  const std::string bytes = read_file(raw);
  const auto expected = static_cast<std::size_t>(d * h * w) * 4;
  if (bytes.size() < expected)
    fail(ErrorKind::Io, "truncated volume file " + raw.string() + ": header dims [" + std::to_string(d) + "," +
                            std::to_string(h) + "," + std::to_string(w) + "] need " + std::to_string(expected) +
                            " bytes, found " + std::to_string(bytes.size()));
  if (bytes.size() > expected)
    fail(ErrorKind::Io, "volume file " + raw.string() + " has " + std::to_string(bytes.size()) +
                            " bytes, header dims need " + std::to_string(expected));
  out.volume.voxels = Volume<float>(d, h, w);
  decode_f32le(bytes, out.volume.voxels);
  try {
    out.volume.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Io, std::string("invalid volume ") + raw.string() + ": " + e.what());
  }
  if (fs::exists(mask_path)) out.mask = read_mask(mask_path, d, h, w);
  return out;
}

}  // namespace sean
