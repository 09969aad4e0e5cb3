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

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sean/losses.hpp"
#include "sean/phantom.hpp"
#include "sean/segnet.hpp"

namespace sean {

struct TrainConfig {
  double base_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  long epochs = 150;
  double poly_power = 0.9;
  double w_dice = 1.0;
  double w_ce = 1.0;
  Index batch_size = 4;
  std::uint64_t seed = 0;
  long checkpoint_every = 0;  // iterations; 0 keeps only the final checkpoint

  void validate() const;
};

/// An aligned, preprocessed case ready for slab extraction.
struct SegCase {
  std::string id;
  Volume<float> image;
  Mask mask;
};

/// Moves the raw volume and its mask by `alpha`, then clamps and
/// standardizes the volume.
SegCase prepare_case(const CtVolume& raw, const Mask& mask, const RigidParams& alpha);

struct SliceRef {
  std::size_t case_index = 0;
  Index z = 0;
};

/// N x 1 x (2T+1) x H x W slabs centred on the referenced slices.
Tensor<float> slab_batch(const std::vector<SegCase>& cases, const std::vector<SliceRef>& refs, Index radius);

/// N x 1 x 1 x H x W {0,1} targets of the referenced slices.
Tensor<float> target_batch(const std::vector<SegCase>& cases, const std::vector<SliceRef>& refs);

/// One epoch of samples: every lesion-bearing slice once plus as many
/// lesion-free slices drawn without replacement (fewer when the data run
/// out), shuffled.
std::vector<SliceRef> balanced_epoch(const std::vector<SegCase>& cases, std::mt19937_64& rng);

using EpochSampler = std::function<std::vector<SliceRef>(std::mt19937_64&)>;

struct TrainLogRow {
  long iter = 0;
  double lr = 0.0;
  double loss = 0.0;
  double dice_term = 0.0;
  double ce_term = 0.0;
};

struct TrainHooks {
  /// Called every cfg.checkpoint_every iterations (after the update).
  std::function<void(long iter, SegModel<float>&)> on_checkpoint;
  /// Called with the offending model before a Numeric error is raised.
  std::function<void(long iter, SegModel<float>&)> on_diverge;
};

struct SegTrainResult {
  std::vector<TrainLogRow> log;
  long total_iter = 0;
};

/// Adam + poly schedule on w_dice * GDL + w_ce * BCE. total_iter is fixed
/// before the first step from the first epoch's sample count. The sampler
/// defaults to balanced_epoch.
SegTrainResult train_segmentation(SegModel<float>& model, const std::vector<SegCase>& cases, const TrainConfig& cfg,
                                  const EpochSampler& sampler = {}, const TrainHooks& hooks = {});

/// Sigmoid probabilities N x 1 x 1 x H x W for the referenced slices, in
/// evaluation mode, `chunk` slabs at a time.
Tensor<float> predict_probabilities(SegModel<float>& model, const std::vector<SegCase>& cases,
                                    const std::vector<SliceRef>& refs, Index chunk = 8);

}  // namespace sean
