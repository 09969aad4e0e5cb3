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

#include "sean/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace sean {

namespace {

void require_same(const Mask& a, const Mask& b, const char* what) {
  if (!a.same_dims(b))
    fail(ErrorKind::InvalidArgument,
         std::string(what) + ": mask shapes differ (" + std::to_string(a.depth()) + "x" + std::to_string(a.height()) +
             "x" + std::to_string(a.width()) + " vs " + std::to_string(b.depth()) + "x" +
             std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
}

// Component label per voxel, -1 for background.
std::vector<Index> label_components(const Mask& mask, Index& count) {
  const Index D = mask.depth(), H = mask.height(), W = mask.width();
  std::vector<Index> label(static_cast<std::size_t>(mask.size()), -1);
  std::vector<Index> stack;
  count = 0;
  for (Index start = 0; start < mask.size(); ++start) {
    if (mask.data()[start] == 0 || label[start] >= 0) continue;
    label[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const Index v = stack.back();
      stack.pop_back();
      const Index z = v / (H * W), y = (v / W) % H, x = v % W;
      for (Index dz = -1; dz <= 1; ++dz)
        for (Index dy = -1; dy <= 1; ++dy)
          for (Index dx = -1; dx <= 1; ++dx) {
            const Index nz = z + dz, ny = y + dy, nx = x + dx;
            if (nz < 0 || nz >= D || ny < 0 || ny >= H || nx < 0 || nx >= W) continue;
            const Index u = (nz * H + ny) * W + nx;
            if (mask.data()[u] != 0 && label[u] < 0) {
              label[u] = count;
              stack.push_back(u);
            }
          }
    }
    ++count;
  }
  return label;
}

}  // namespace

double dice_coefficient(const Mask& pred, const Mask& gt) {
  require_same(pred, gt, "dice_coefficient");
  Index p = 0, g = 0, both = 0;
  for (Index i = 0; i < pred.size(); ++i) {
    const bool a = pred.data()[i] != 0, b = gt.data()[i] != 0;
    p += a;
    g += b;
    both += a && b;
  }
  if (p + g == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(p + g);
}

std::vector<LesionInstance> connected_components(const Mask& mask) {
  Index count = 0;
  const auto label = label_components(mask, count);
  std::vector<LesionInstance> out(static_cast<std::size_t>(count));
  for (Index i = 0; i < mask.size(); ++i)
    if (label[i] >= 0) out[label[i]].voxels.push_back(i);
  return out;
}

LesionScores lesion_scores(const LesionCounts& c) {
  if (c.n_gt == 0 && c.n_pred == 0) return {1.0, 1.0, 1.0};
  if (c.n_gt == 0) return {1.0, 0.0, 0.0};
  if (c.n_pred == 0) return {0.0, 1.0, 0.0};
  LesionScores s;
  s.recall = static_cast<double>(c.tp) / static_cast<double>(c.n_gt);
  s.precision = static_cast<double>(c.tp) / static_cast<double>(c.n_pred);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

LesionPRF lesion_prf(const Mask& pred, const Mask& gt, double iou_threshold) {
  require_same(pred, gt, "lesion_prf");
  require(iou_threshold >= 0.0 && iou_threshold < 1.0, "iou threshold must lie in [0, 1)");
  Index n_pred = 0, n_gt = 0;
  const auto lp = label_components(pred, n_pred);
  const auto lg = label_components(gt, n_gt);
  std::vector<Index> area_p(n_pred, 0), area_g(n_gt, 0);
  std::map<std::pair<Index, Index>, Index> overlap;
  for (Index i = 0; i < pred.size(); ++i) {
    if (lp[i] >= 0) ++area_p[lp[i]];
    if (lg[i] >= 0) ++area_g[lg[i]];
    if (lp[i] >= 0 && lg[i] >= 0) ++overlap[{lp[i], lg[i]}];
  }
  std::vector<LesionMatch> candidates;
  for (const auto& [key, inter] : overlap) {
    const double iou = static_cast<double>(inter) / static_cast<double>(area_p[key.first] + area_g[key.second] - inter);
    if (iou >= iou_threshold) candidates.push_back({key.first, key.second, iou});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const LesionMatch& a, const LesionMatch& b) { return a.iou > b.iou; });

  LesionPRF out;
  std::vector<bool> used_p(n_pred, false), used_g(n_gt, false);
  for (const auto& m : candidates) {
    if (used_p[m.pred] || used_g[m.gt]) continue;
    used_p[m.pred] = used_g[m.gt] = true;
    out.matches.push_back(m);
  }
  out.counts.n_pred = n_pred;
  out.counts.n_gt = n_gt;
  out.counts.tp = static_cast<Index>(out.matches.size());
  out.counts.fp = n_pred - out.counts.tp;
  out.counts.fn = n_gt - out.counts.tp;
  out.scores = lesion_scores(out.counts);
  return out;
}

AlignmentError alignment_error(const RigidParams& pred, const RigidParams& truth) {
  require(pred.finite() && truth.finite(), "alignment_error: parameters must be finite");
  double d = (pred.theta - truth.theta) * 180.0 / std::numbers::pi;
  d = std::remainder(d, 360.0);
  return {std::abs(d), std::abs(pred.tx - truth.tx), std::abs(pred.ty - truth.ty)};
}

}  // namespace sean
