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

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sean/align_net.hpp"
#include "sean/config.hpp"
#include "sean/metrics.hpp"
#include "sean/segnet.hpp"

namespace sean {

struct EvalCase {
  CtVolume volume;
  Mask mask;
  std::optional<RigidParams> true_params;  // perturbation the phantom received
};

struct VolumePrediction {
  Mask mask;               // in the frame of the input volume
  RigidParams alpha;       // correcting transform that was applied
  double align_seconds = 0.0;
  double segment_seconds = 0.0;
};

/// Align (identity when `align` is null), preprocess, segment every slice
/// from its slab, move the probabilities back to the input frame and
/// threshold them.
VolumePrediction predict_volume(SegModel<float>& model, AlignmentNet<float>* align, const CtVolume& vol,
                                double threshold = 0.5);

struct CaseResult {
  std::string id;
  double dice = 0.0;
  LesionCounts counts;
  RigidParams alpha;
  std::optional<AlignmentError> align_error;
  double align_seconds = 0.0;
  double segment_seconds = 0.0;
};

/// Dice and 3D lesion counts of one case.
CaseResult score_case(const std::string& id, const Mask& pred, const Mask& gt, double iou_threshold);

struct MetricsReport {
  std::vector<CaseResult> cases;  // sorted by id
  double iou_threshold = 0.1;
  double mean_dice = 0.0;         // macro over cases
  LesionCounts totals;            // pooled over cases
  LesionScores lesion;            // from the pooled counts
  std::optional<AlignmentError> mean_align_error;
  double mean_align_seconds = 0.0;
  double max_align_seconds = 0.0;
  double mean_segment_seconds = 0.0;

  nlohmann::json to_json() const;
  /// case_id,dice,n_gt,n_pred,tp,fp,fn
  std::string to_csv() const;
};

MetricsReport summarize(std::vector<CaseResult> cases, double iou_threshold);

MetricsReport evaluate_dataset(SegModel<float>& model, AlignmentNet<float>* align, const std::vector<EvalCase>& cases,
                               const EvalConfig& cfg);

}  // namespace sean
