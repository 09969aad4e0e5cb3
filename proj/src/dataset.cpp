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

#include "sean/dataset.hpp"

#include <cstdio>

#include "json.hpp"
#include "sean/config.hpp"
#include "sean/fsutil.hpp"
#include "sean/volume_io.hpp"

namespace sean {

using nlohmann::json;

std::string case_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "case_%05zu", k);
  return buf;
}

void write_dataset(const std::filesystem::path& dir, const PhantomSpec& spec, std::size_t num, std::uint64_t seed) {
  spec.validate();
  require(num >= 1, "dataset size must be >= 1");
  const auto cases_dir = dir / "cases";
  std::filesystem::create_directories(cases_dir);
  RunConfig echo;
  echo.phantom = spec;
  json entries = json::array();
  for (std::size_t k = 0; k < num; ++k) {
    Phantom ph = generate_phantom(spec, mix_seed(seed, k));
    ph.volume.id = case_id(k);
    write_volume(ph.volume, &ph.truth.lesion_mask, cases_dir);
    const auto& a = ph.truth.true_params;
    entries.push_back({{"id", ph.volume.id},
                       {"true_params", {{"theta", a.theta}, {"tx", a.tx}, {"ty", a.ty}}},
                       {"has_lesion", ph.truth.has_lesion},
                       {"lesion_side", ph.truth.lesion_side}});
  }
  const json manifest = {{"format_version", kDatasetFormatVersion},
                         {"seed", seed},
                         {"spec", to_json(echo)["phantom"]},
                         {"cases", entries}};
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::vector<EvalCase> read_dataset(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.json";
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "dataset manifest not found: " + path.string());
  json manifest;
  try {
    manifest = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed dataset manifest " + path.string() + ": " + e.what());
  }
  if (manifest.value("format_version", -1) != kDatasetFormatVersion)
    fail(ErrorKind::Config, "dataset manifest " + path.string() + " has an unsupported format_version");
  std::vector<EvalCase> out;
  try {
    for (const auto& entry : manifest.at("cases")) {
      const auto id = entry.at("id").get<std::string>();
      LoadedVolume lv = read_volume(dir / "cases" / (id + ".json"));
      if (!lv.mask) fail(ErrorKind::Io, "case '" + id + "' has no mask file");
      EvalCase c{std::move(lv.volume), std::move(*lv.mask), std::nullopt};
      if (entry.contains("true_params")) {
        const auto& t = entry.at("true_params");
        c.true_params = RigidParams{t.at("theta").get<double>(), t.at("tx").get<double>(), t.at("ty").get<double>()};
      }
      out.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Io, "malformed dataset manifest " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace sean
