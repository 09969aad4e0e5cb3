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

#include "sean/train.hpp"

#include <algorithm>
#include <cmath>

#include "sean/nn/optim.hpp"

namespace sean {

void TrainConfig::validate() const {
  require(base_lr > 0.0, "train.base_lr must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "train.betas must lie in [0, 1)");
  require(epochs >= 1, "train.epochs must be >= 1");
  require(poly_power > 0.0, "train.poly_power must be > 0");
  require(w_dice >= 0.0 && w_ce >= 0.0 && w_dice + w_ce > 0.0, "train loss weights must be >= 0 and not both 0");
  require(batch_size >= 1, "train.batch_size must be >= 1");
  require(checkpoint_every >= 0, "train.checkpoint_every must be >= 0");
}

SegCase prepare_case(const CtVolume& raw, const Mask& mask, const RigidParams& alpha) {
  if (!mask.same_dims(raw.voxels)) fail(ErrorKind::InvalidArgument, "mask of case '" + raw.id + "' has wrong shape");
  CtVolume moved = raw;
  moved.voxels = transform_volume(raw.voxels, alpha);
  return {raw.id, preprocess(moved).voxels, transform_mask(mask, alpha)};
}

Tensor<float> slab_batch(const std::vector<SegCase>& cases, const std::vector<SliceRef>& refs, Index radius) {
  require(!refs.empty(), "slab_batch: no slices");
  const auto& first = cases.at(refs.front().case_index).image;
  Tensor<float> out(static_cast<Index>(refs.size()), 1, 2 * radius + 1, first.height(), first.width());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const auto& img = cases.at(refs[i].case_index).image;
    require(img.height() == out.h() && img.width() == out.w(), "slab_batch: cases differ in slice size");
    const auto slab = extract_slab(img, refs[i].z, radius);
    for (Index t = 0; t < slab.depth(); ++t) out.plane(static_cast<Index>(i), 0, t) = slab.slice(t);
  }
  return out;
}

Tensor<float> target_batch(const std::vector<SegCase>& cases, const std::vector<SliceRef>& refs) {
  require(!refs.empty(), "target_batch: no slices");
  const auto& first = cases.at(refs.front().case_index).mask;
  Tensor<float> out(static_cast<Index>(refs.size()), 1, 1, first.height(), first.width());
  for (std::size_t i = 0; i < refs.size(); ++i)
    out.plane(static_cast<Index>(i), 0, 0) = cases.at(refs[i].case_index).mask.slice(refs[i].z).cast<float>();
  return out;
}

std::vector<SliceRef> balanced_epoch(const std::vector<SegCase>& cases, std::mt19937_64& rng) {
  std::vector<SliceRef> lesion, clear;
  for (std::size_t c = 0; c < cases.size(); ++c)
    for (Index z = 0; z < cases[c].mask.depth(); ++z)
      (cases[c].mask.slice(z).cast<int>().sum() > 0 ? lesion : clear).push_back({c, z});
  std::shuffle(clear.begin(), clear.end(), rng);
  clear.resize(std::min(clear.size(), lesion.size()));
  std::vector<SliceRef> out = lesion;
  out.insert(out.end(), clear.begin(), clear.end());
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

SegTrainResult train_segmentation(SegModel<float>& model, const std::vector<SegCase>& cases, const TrainConfig& cfg,
                                  const EpochSampler& sampler, const TrainHooks& hooks) {
  cfg.validate();
  require(!cases.empty(), "train_segmentation: empty dataset");
  const EpochSampler sample = sampler ? sampler : EpochSampler([&](std::mt19937_64& r) { return balanced_epoch(cases, r); });
  std::mt19937_64 rng(mix_seed(cfg.seed, 17));
  const Index radius = model.config().radius;

  auto params = model.parameters();
  nn::Adam<float> adam(params, cfg.beta1, cfg.beta2);
  model.set_training(true);

  std::vector<SliceRef> epoch_refs = sample(rng);
  require(!epoch_refs.empty(), "train_segmentation: the sampler produced no slices");
  const long per_epoch = static_cast<long>((epoch_refs.size() + cfg.batch_size - 1) / cfg.batch_size);
  SegTrainResult result;
  result.total_iter = cfg.epochs * per_epoch;

  long iter = 0;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch > 0) epoch_refs = sample(rng);
    for (long b = 0; b < per_epoch && iter < result.total_iter; ++b, ++iter) {
      const std::size_t start = static_cast<std::size_t>(b * cfg.batch_size) % epoch_refs.size();
      std::vector<SliceRef> refs;
      for (Index k = 0; k < cfg.batch_size && start + k < epoch_refs.size(); ++k) refs.push_back(epoch_refs[start + k]);

      const auto logits = model.forward(slab_batch(cases, refs, radius));
      Tensor<float> d_logits;
      const LossTerms loss = combined_loss(logits, target_batch(cases, refs), cfg.w_dice, cfg.w_ce, &d_logits);
      const double lr = nn::poly_lr(cfg.base_lr, iter, result.total_iter, cfg.poly_power);
      if (!std::isfinite(loss.total) || !d_logits.all_finite()) {
        if (hooks.on_diverge) hooks.on_diverge(iter, model);
        fail(ErrorKind::Numeric, "segmentation training diverged at iteration " + std::to_string(iter));
      }
      adam.zero_grad();
      model.backward(d_logits);
      adam.step(lr);
      result.log.push_back({iter, lr, loss.total, loss.dice, loss.ce});
      if (cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0 && hooks.on_checkpoint) {
        hooks.on_checkpoint(iter + 1, model);
        model.set_training(true);  // the hook may have run inference
      }
    }
  }
  model.set_training(false);
  return result;
}

Tensor<float> predict_probabilities(SegModel<float>& model, const std::vector<SegCase>& cases,
                                    const std::vector<SliceRef>& refs, Index chunk) {
  require(!refs.empty() && chunk >= 1, "predict_probabilities: nothing to predict");
  model.set_training(false);
  Tensor<float> out;
  for (std::size_t start = 0; start < refs.size(); start += chunk) {
    const std::vector<SliceRef> part(refs.begin() + start, refs.begin() + std::min(refs.size(), start + chunk));
    Tensor<float> logits = model.forward(slab_batch(cases, part, model.config().radius));
    logits.array() = sigmoid<float>(logits.array());
    out = out.empty() ? logits : nn::concat_batch(out, logits);
  }
  return out;
}

}  // namespace sean
