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
#include "sean/align_net.hpp"
#include "sean/phantom.hpp"
#include "sean/segnet.hpp"
#include "sean/train.hpp"

namespace sean {

struct EvalConfig {
  double iou_threshold = 0.1;
  double threshold = 0.5;  // on the sigmoid output
};

/// Everything a command can be configured with. Serialized as nested JSON
/// sections: phantom, align, train, model, attention, eval.
struct RunConfig {
  PhantomSpec phantom;
  AlignTrainConfig align;
  TrainConfig train;
  SegConfig model;
  EvalConfig eval;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Reads sections over the defaults; unknown sections or keys and values
/// of the wrong type are Config errors.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "section.key=value" overrides to a JSON document. The value is
/// parsed as JSON when possible and taken as a string otherwise.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& overrides);

/// Defaults, then `base` (e.g. the config stored in a checkpoint), then
/// the optional file, then overrides; validated.
RunConfig load_run_config(const std::filesystem::path& file, const std::vector<std::string>& overrides,
                          const nlohmann::json& base = nlohmann::json::object());

/// The "model" and "attention" sections for a segmentation config.
nlohmann::json model_sections_json(const SegConfig& cfg);
SegConfig seg_config_from_json(const nlohmann::json& model, const nlohmann::json& attention);

}  // namespace sean
