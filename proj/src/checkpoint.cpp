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

#include "sean/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <map>

#include "sean/fsutil.hpp"

namespace sean {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'E', 'A', 'N', 'C', 'K', 'P', 'T'};

std::string shape_string(const std::vector<Index>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
  return s + "]";
}

}  // namespace

std::string encode_checkpoint(const std::string& kind, const nlohmann::json& config,
                              const nn::ParamRefs<float>& params) {
  nlohmann::json table = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto* p : params) {
    table.push_back({{"name", p->name}, {"shape", p->shape}, {"offset", offset}, {"count", p->size()}});
    offset += static_cast<std::uint64_t>(p->size());
  }
  const nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                                 {"kind", kind},
                                 {"dtype", "f32le"},
                                 {"config", config},
                                 {"tensors", table}};
  const std::string text = header.dump();
  const std::uint64_t length = text.size();
  std::string out(kMagic, sizeof(kMagic));
  out.append(reinterpret_cast<const char*>(&length), sizeof(length));
  out += text;
  for (const auto* p : params) out.append(reinterpret_cast<const char*>(p->value.data()), p->size() * sizeof(float));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes, const std::string& source) {
  auto bad = [&](const std::string& why) { fail(ErrorKind::Io, source + ": " + why); };
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) bad("not a checkpoint file");
  std::uint64_t length = 0;
  std::memcpy(&length, bytes.data() + 8, sizeof(length));
  if (length > bytes.size() - 16) bad("truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, length));
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("malformed header: ") + e.what());
  }
  const int version = header.value("format_version", -1);
  if (version != kCheckpointFormatVersion)
    fail(ErrorKind::Config, source + ": format_version " + std::to_string(version) + " is not supported (expected " +
                                std::to_string(kCheckpointFormatVersion) + ")");
  if (header.value("dtype", "") != "f32le") bad("unsupported dtype");

  Checkpoint ckpt;
  ckpt.kind = header.value("kind", "");
  ckpt.config = header.value("config", nlohmann::json::object());
  const std::size_t payload = 16 + length;
  const std::size_t floats = (bytes.size() - payload) / sizeof(float);
  try {
    for (const auto& t : header.at("tensors")) {
      StoredTensor st;
      st.name = t.at("name").get<std::string>();
      st.shape = t.at("shape").get<std::vector<Index>>();
      const auto offset = t.at("offset").get<std::uint64_t>();
      const auto count = t.at("count").get<std::uint64_t>();
      if (offset + count > floats) bad("truncated payload at tensor " + st.name);
      st.values.resize(count);
      std::memcpy(st.values.data(), bytes.data() + payload + offset * sizeof(float), count * sizeof(float));
      ckpt.tensors.push_back(std::move(st));
    }
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("malformed tensor table: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind, const nlohmann::json& config,
                     const nn::ParamRefs<float>& params) {
  write_file_atomic(path, encode_checkpoint(kind, config, params));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

void restore_parameters(const Checkpoint& ckpt, const nn::ParamRefs<float>& params) {
  std::map<std::string, const StoredTensor*> by_name;
  for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
  for (auto* p : params) {
    const auto it = by_name.find(p->name);
    if (it == by_name.end()) fail(ErrorKind::Config, "checkpoint has no tensor '" + p->name + "'");
    const StoredTensor& t = *it->second;
    if (t.shape.size() != p->shape.size())
      fail(ErrorKind::Config, "tensor '" + p->name + "': rank " + std::to_string(t.shape.size()) +
                                  " in checkpoint, " + std::to_string(p->shape.size()) + " in model");
    for (std::size_t d = 0; d < t.shape.size(); ++d)
      if (t.shape[d] != p->shape[d])
        fail(ErrorKind::Config, "tensor '" + p->name + "': dimension " + std::to_string(d) + " is " +
                                    std::to_string(t.shape[d]) + " in checkpoint but " +
                                    std::to_string(p->shape[d]) + " in model (checkpoint shape " +
                                    shape_string(t.shape) + ", model shape " + shape_string(p->shape) + ")");
    if (static_cast<Index>(t.values.size()) != p->size())
      fail(ErrorKind::Io, "tensor '" + p->name + "': value count disagrees with its shape");
    p->value = Eigen::Map<const Eigen::ArrayXf>(t.values.data(), p->size());
  }
  if (by_name.size() != params.size())
    fail(ErrorKind::Config, "checkpoint holds " + std::to_string(by_name.size()) + " tensors, model expects " +
                                std::to_string(params.size()));
}

}  // namespace sean
