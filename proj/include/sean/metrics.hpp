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

#include <vector>

#include "sean/rigid.hpp"
#include "sean/volume.hpp"

namespace sean {

/// 2|P n G| / (|P| + |G|); 1 when both masks are empty.
double dice_coefficient(const Mask& pred, const Mask& gt);

/// A connected component, as sorted linear voxel indices.
struct LesionInstance {
  std::vector<Index> voxels;
  Index area() const { return static_cast<Index>(voxels.size()); }
};

/// Components under full neighbourhood connectivity: 8-connected within a
/// slice, 26-connected across slices. Ordered by their first voxel in
/// raster order (slice, row, column).
std::vector<LesionInstance> connected_components(const Mask& mask);

struct LesionMatch {
  Index pred = 0;
  Index gt = 0;
  double iou = 0.0;
};

struct LesionCounts {
  Index n_gt = 0, n_pred = 0, tp = 0, fp = 0, fn = 0;

  LesionCounts& operator+=(const LesionCounts& o) {
    n_gt += o.n_gt;
    n_pred += o.n_pred;
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct LesionScores {
  double recall = 0.0, precision = 0.0, f1 = 0.0;
};

/// Recall, precision and F1 from counts; no GT and no prediction scores
/// (1, 1, 1), predictions without GT (1, 0, 0), GT without predictions (0, 1, 0).
LesionScores lesion_scores(const LesionCounts& counts);

struct LesionPRF {
  LesionScores scores;
  LesionCounts counts;
  std::vector<LesionMatch> matches;
};

/// Greedy one-to-one matching of predicted and ground-truth components in
/// descending IoU order; a pair may match when IoU >= threshold and IoU > 0.
/// Ties go to the lower (pred, gt) index pair.
LesionPRF lesion_prf(const Mask& pred, const Mask& gt, double iou_threshold = 0.1);

struct AlignmentError {
  double theta_deg = 0.0;
  double tx_px = 0.0;
  double ty_px = 0.0;
};

/// Absolute parameter differences with the angle difference wrapped to
/// [-180, 180] degrees.
AlignmentError alignment_error(const RigidParams& pred, const RigidParams& truth);

}  // namespace sean
