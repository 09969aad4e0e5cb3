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

#include "sean/evaluate.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>

#include "sean/train.hpp"

namespace sean {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

VolumePrediction predict_volume(SegModel<float>& model, AlignmentNet<float>* align, const CtVolume& vol,
                                double threshold) {
  vol.validate();
  VolumePrediction out;
  auto t0 = std::chrono::steady_clock::now();
  if (align != nullptr) out.alpha = estimate_volume_params(*align, vol);
  out.align_seconds = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  CtVolume moved = vol;
  moved.voxels = transform_volume(vol.voxels, out.alpha);
  const std::vector<SegCase> cases{{vol.id, preprocess(moved).voxels, Mask()}};
  std::vector<SliceRef> refs;
  for (Index z = 0; z < vol.voxels.depth(); ++z) refs.push_back({0, z});
  const Tensor<float> prob = predict_probabilities(model, cases, refs);

  const RigidParams back = invert_params(out.alpha);
  const bool identity = out.alpha == RigidParams{};
  out.mask = Mask(vol.voxels.depth(), vol.voxels.height(), vol.voxels.width());
  for (Index z = 0; z < vol.voxels.depth(); ++z) {
    const ImageF p = identity ? ImageF(prob.plane(z, 0, 0)) : apply_rigid(ImageF(prob.plane(z, 0, 0)), back);
    out.mask.slice(z) = (p.array() > static_cast<float>(threshold)).cast<std::uint8_t>().matrix();
  }
  out.segment_seconds = seconds_since(t0);
  return out;
}

CaseResult score_case(const std::string& id, const Mask& pred, const Mask& gt, double iou_threshold) {
  CaseResult r;
  r.id = id;
  r.dice = dice_coefficient(pred, gt);
  r.counts = lesion_prf(pred, gt, iou_threshold).counts;
  return r;
}

MetricsReport summarize(std::vector<CaseResult> cases, double iou_threshold) {
  std::sort(cases.begin(), cases.end(), [](const CaseResult& a, const CaseResult& b) { return a.id < b.id; });
  MetricsReport rep;
  rep.iou_threshold = iou_threshold;
  rep.cases = std::move(cases);
  AlignmentError sum;
  std::size_t n_align = 0;
  for (const auto& c : rep.cases) {
    rep.mean_dice += c.dice;
    rep.totals += c.counts;
    rep.mean_align_seconds += c.align_seconds;
    rep.max_align_seconds = std::max(rep.max_align_seconds, c.align_seconds);
    rep.mean_segment_seconds += c.segment_seconds;
    if (c.align_error) {
      sum.theta_deg += c.align_error->theta_deg;
      sum.tx_px += c.align_error->tx_px;
      sum.ty_px += c.align_error->ty_px;
      ++n_align;
    }
  }
  if (!rep.cases.empty()) {
    const double n = static_cast<double>(rep.cases.size());
    rep.mean_dice /= n;
    rep.mean_align_seconds /= n;
    rep.mean_segment_seconds /= n;
  }
  if (n_align > 0) {
    const double n = static_cast<double>(n_align);
    rep.mean_align_error = AlignmentError{sum.theta_deg / n, sum.tx_px / n, sum.ty_px / n};
  }
  rep.lesion = lesion_scores(rep.totals);
  return rep;
}

MetricsReport evaluate_dataset(SegModel<float>& model, AlignmentNet<float>* align, const std::vector<EvalCase>& cases,
                               const EvalConfig& cfg) {
  std::vector<CaseResult> results;
  for (const auto& c : cases) {
    if (c.mask.empty()) fail(ErrorKind::Io, "case '" + c.volume.id + "' has no ground-truth mask");
    const auto pred = predict_volume(model, align, c.volume, cfg.threshold);
    CaseResult r = score_case(c.volume.id, pred.mask, c.mask, cfg.iou_threshold);
    r.alpha = pred.alpha;
    r.align_seconds = pred.align_seconds;
    r.segment_seconds = pred.segment_seconds;
    if (c.true_params && align != nullptr) r.align_error = alignment_error(pred.alpha, invert_params(*c.true_params));
    results.push_back(std::move(r));
  }
  return summarize(std::move(results), cfg.iou_threshold);
}

nlohmann::json MetricsReport::to_json() const {
  using nlohmann::json;
  auto counts = [](const LesionCounts& c) {
    return json{{"n_gt", c.n_gt}, {"n_pred", c.n_pred}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
  };
  auto align = [](const AlignmentError& e) {
    return json{{"theta_deg", e.theta_deg}, {"tx_px", e.tx_px}, {"ty_px", e.ty_px}};
  };
  json per_case = json::array();
  for (const auto& c : cases) {
    json row = {{"case_id", c.id},
                {"dice", c.dice},
                {"lesions", counts(c.counts)},
                {"alpha", {{"theta", c.alpha.theta}, {"tx", c.alpha.tx}, {"ty", c.alpha.ty}}},
                {"align_seconds", c.align_seconds},
                {"segment_seconds", c.segment_seconds}};
    if (c.align_error) row["align_error"] = align(*c.align_error);
    per_case.push_back(row);
  }
  json out = {{"num_cases", cases.size()},
              {"iou_threshold", iou_threshold},
              {"mean_dice", mean_dice},
              {"lesions", counts(totals)},
              {"recall", lesion.recall},
              {"precision", lesion.precision},
              {"f1", lesion.f1},
              {"timing",
               {{"mean_align_seconds", mean_align_seconds},
                {"max_align_seconds", max_align_seconds},
                {"mean_segment_seconds", mean_segment_seconds}}},
              {"cases", per_case}};
  out["mean_align_error"] = mean_align_error ? align(*mean_align_error) : json(nullptr);
  return out;
}

std::string MetricsReport::to_csv() const {
  std::string out = "case_id,dice,n_gt,n_pred,tp,fp,fn\n";
  char buf[64];
  for (const auto& c : cases) {
    std::snprintf(buf, sizeof(buf), "%.17g", c.dice);
    out += c.id + "," + buf + "," + std::to_string(c.counts.n_gt) + "," + std::to_string(c.counts.n_pred) + "," +
           std::to_string(c.counts.tp) + "," + std::to_string(c.counts.fp) + "," + std::to_string(c.counts.fn) + "\n";
  }
  return out;
}

}  // namespace sean
