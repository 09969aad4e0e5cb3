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
#include <vector>

#include "sean/nn/layers.hpp"
#include "sean/phantom.hpp"
#include "sean/rigid.hpp"

namespace sean {

/// c2d[32,7,7]-relu-max2d[2,2]-c2d[32,5,5]-relu-max2d[2,2]-fc[3] over a
/// square single-channel input. Outputs (theta radians, tx, ty) with the
/// shifts in normalized image units. The final layer starts at zero, so an
/// untrained network predicts the identity transform.
template <typename Scalar>
class AlignmentNet {
 public:
  static constexpr Index kFilters = 32;

  explicit AlignmentNet(Index input_size = 128, std::uint64_t seed = 0)
      : input_size_(input_size),
        conv1_("align.conv1", 1, kFilters, {1, 7, 7}),
        conv2_("align.conv2", kFilters, kFilters, {1, 5, 5}),
        fc_("align.fc", kFilters * (input_size / 4) * (input_size / 4), 3) {
    require(input_size >= 8 && input_size % 4 == 0, "alignment input size must be a positive multiple of 4");
    std::mt19937_64 rng(seed);
    conv1_.init_he(rng);
    conv2_.init_he(rng);
  }

  Index input_size() const { return input_size_; }

  /// x: N x 1 x 1 x S x S. Returns N x 3.
  RowMatrix<Scalar> forward(const Tensor<Scalar>& x) {
    require(x.c() == 1 && x.d() == 1 && x.h() == input_size_ && x.w() == input_size_,
            "alignment net: expected N x 1 x 1 x " + std::to_string(input_size_) + " x " +
                std::to_string(input_size_) + " input, got " + to_string(x.shape()));
    auto h = pool1_.forward(relu1_.forward(conv1_.forward(x)));
    h = pool2_.forward(relu2_.forward(conv2_.forward(h)));
    return fc_.forward(h);
  }

  void backward(const RowMatrix<Scalar>& d_out) {
    auto g = fc_.backward(d_out);
    g = conv2_.backward(relu2_.backward(pool2_.backward(g)));
    conv1_.backward(relu1_.backward(pool1_.backward(g)));
  }

  nn::ParamRefs<Scalar> parameters() {
    nn::ParamRefs<Scalar> p;
    conv1_.collect(p);
    conv2_.collect(p);
    fc_.collect(p);
    return p;
  }

 private:
  Index input_size_;
  nn::Conv3d<Scalar> conv1_;
  nn::ReLU<Scalar> relu1_;
  nn::MaxPool2<Scalar> pool1_;
  nn::Conv3d<Scalar> conv2_;
  nn::ReLU<Scalar> relu2_;
  nn::MaxPool2<Scalar> pool2_;
  nn::Linear<Scalar> fc_;
};

/// Maps a raw network output row onto pixel-unit parameters for an image
/// of the given size.
RigidParams output_to_params(const Eigen::Vector3d& raw, Index height, Index width);

/// Chain rule through output_to_params.
Eigen::Vector3d params_grad_to_output(const Eigen::Vector3d& grad, Index height, Index width);

/// Windowed, resized batch N x 1 x 1 x S x S from windowed slices.
Tensor<float> alignment_batch(const std::vector<ImageF>& windowed, Index size);

/// Indices of slices whose tissue fraction exceeds 1%.
std::vector<Index> tissue_slices(const CtVolume& vol);

struct AlignTrainConfig {
  long epochs = 40;
  Index batch_size = 8;
  double base_lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double poly_power = 0.9;
  std::uint64_t seed = 0;
  Index input_size = 128;

  void validate() const;
};

struct AlignEpochStats {
  long epoch = 0;
  double loss = 0.0;
  double symmetry = 0.0;
  double restoration = 0.0;
};

struct AlignTrainResult {
  AlignmentNet<float> net;
  std::vector<AlignEpochStats> curve;
};

using AlignEpochCallback = std::function<void(const AlignEpochStats&, AlignmentNet<float>&)>;

/// Unsupervised training on the alignment loss. Each epoch visits every
/// volume once with one random tissue slice. Throws Numeric when the loss
/// stops being finite.
AlignTrainResult train_alignment(const std::vector<CtVolume>& volumes, const AlignTrainConfig& cfg,
                                 const AlignEpochCallback& on_epoch = {});

/// Predicted correcting transforms for windowed slices of size height x width.
std::vector<RigidParams> predict_alignment(AlignmentNet<float>& net, const std::vector<ImageF>& windowed);

/// Coordinate-wise median (mean of the two middle values for even counts).
RigidParams median_params(const std::vector<RigidParams>& params);

/// Median of per-slice predictions over tissue slices. Throws
/// InvalidArgument when the volume has no tissue slice.
RigidParams estimate_volume_params(AlignmentNet<float>& net, const CtVolume& vol);

}  // namespace sean
