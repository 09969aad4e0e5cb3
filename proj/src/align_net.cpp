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

#include "sean/align_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sean/nn/optim.hpp"

namespace sean {

RigidParams output_to_params(const Eigen::Vector3d& raw, Index height, Index width) {
  return {raw[0], raw[1] * 0.5 * static_cast<double>(width - 1), raw[2] * 0.5 * static_cast<double>(height - 1)};
}

Eigen::Vector3d params_grad_to_output(const Eigen::Vector3d& grad, Index height, Index width) {
  return {grad[0], grad[1] * 0.5 * static_cast<double>(width - 1), grad[2] * 0.5 * static_cast<double>(height - 1)};
}

Tensor<float> alignment_batch(const std::vector<ImageF>& windowed, Index size) {
  Tensor<float> batch(static_cast<Index>(windowed.size()), 1, 1, size, size);
  for (std::size_t i = 0; i < windowed.size(); ++i)
    batch.plane(static_cast<Index>(i), 0, 0) = resize_bilinear(windowed[i], size, size);
  return batch;
}

std::vector<Index> tissue_slices(const CtVolume& vol) {
  std::vector<Index> out;
  for (Index z = 0; z < vol.voxels.depth(); ++z)
    if (tissue_fraction(vol.voxels.slice(z)) > 0.01) out.push_back(z);
  return out;
}

void AlignTrainConfig::validate() const {
  require(epochs >= 1, "align.epochs must be >= 1");
  require(batch_size >= 1, "align.batch_size must be >= 1");
  require(base_lr > 0.0, "align.base_lr must be > 0");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "align.betas must lie in [0, 1)");
  require(poly_power > 0.0, "align.poly_power must be > 0");
  require(input_size >= 8 && input_size % 4 == 0, "align.input_size must be a multiple of 4 and >= 8");
}

AlignTrainResult train_alignment(const std::vector<CtVolume>& volumes, const AlignTrainConfig& cfg,
                                 const AlignEpochCallback& on_epoch) {
  cfg.validate();
  require(!volumes.empty(), "train_alignment: empty dataset");
  std::vector<std::vector<Index>> tissue;
  std::vector<std::size_t> usable;
  for (std::size_t v = 0; v < volumes.size(); ++v) {
    tissue.push_back(tissue_slices(volumes[v]));
    if (!tissue.back().empty()) usable.push_back(v);
  }
  require(!usable.empty(), "train_alignment: no volume contains a tissue slice");

  AlignTrainResult result{AlignmentNet<float>(cfg.input_size, cfg.seed), {}};
  auto& net = result.net;
  nn::Adam<float> adam(net.parameters(), cfg.beta1, cfg.beta2);
  std::mt19937_64 rng(mix_seed(cfg.seed, 11));

  const long per_epoch = static_cast<long>((usable.size() + cfg.batch_size - 1) / cfg.batch_size);
  const long total_iter = cfg.epochs * per_epoch;
  long iter = 0;
  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = usable;
    std::shuffle(order.begin(), order.end(), rng);
    AlignEpochStats stats{epoch, 0.0, 0.0, 0.0};
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++iter) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<ImageF> slices;
      for (std::size_t i = start; i < stop; ++i) {
        const auto& candidates = tissue[order[i]];
        const Index z = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
        slices.push_back(window_slice(volumes[order[i]].voxels.slice(z)));
      }
      const auto batch = alignment_batch(slices, cfg.input_size);
      const RowMatrix<float> out = net.forward(batch);
      RowMatrix<float> d_out(out.rows(), 3);
      const double inv_n = 1.0 / static_cast<double>(slices.size());
      for (Index n = 0; n < out.rows(); ++n) {
        const ImageF& a = slices[n];
        const RigidParams alpha = output_to_params(out.row(n).transpose().cast<double>(), a.rows(), a.cols());
        const AlignmentLoss loss = alignment_loss(a, alpha, true);
        if (!std::isfinite(loss.total) || !loss.grad.allFinite())
          fail(ErrorKind::Numeric, "alignment training diverged at iteration " + std::to_string(iter));
        stats.loss += loss.total;
        stats.symmetry += loss.symmetry;
        stats.restoration += loss.restoration;
        d_out.row(n) = (params_grad_to_output(loss.grad, a.rows(), a.cols()) * inv_n).cast<float>().transpose();
      }
      adam.zero_grad();
      net.backward(d_out);
      adam.step(nn::poly_lr(cfg.base_lr, iter, total_iter, cfg.poly_power));
    }
    const double count = static_cast<double>(order.size());
    stats.loss /= count;
    stats.symmetry /= count;
    stats.restoration /= count;
    result.curve.push_back(stats);
    if (on_epoch) on_epoch(stats, net);
  }
  return result;
}

std::vector<RigidParams> predict_alignment(AlignmentNet<float>& net, const std::vector<ImageF>& windowed) {
  std::vector<RigidParams> out;
  constexpr std::size_t kChunk = 16;
  for (std::size_t start = 0; start < windowed.size(); start += kChunk) {
    const std::size_t stop = std::min(windowed.size(), start + kChunk);
    const std::vector<ImageF> chunk(windowed.begin() + start, windowed.begin() + stop);
    const RowMatrix<float> raw = net.forward(alignment_batch(chunk, net.input_size()));
    for (Index n = 0; n < raw.rows(); ++n)
      out.push_back(output_to_params(raw.row(n).transpose().cast<double>(), chunk[n].rows(), chunk[n].cols()));
  }
  return out;
}

RigidParams median_params(const std::vector<RigidParams>& params) {
  require(!params.empty(), "median_params: no predictions");
  auto median = [&](auto field) {
    std::vector<double> v;
    for (const auto& p : params) v.push_back(p.*field);
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  return {median(&RigidParams::theta), median(&RigidParams::tx), median(&RigidParams::ty)};
}

RigidParams estimate_volume_params(AlignmentNet<float>& net, const CtVolume& vol) {
  const auto slices = tissue_slices(vol);
  if (slices.empty()) fail(ErrorKind::InvalidArgument, "volume '" + vol.id + "' has no tissue slices to align");
  std::vector<ImageF> windowed;
  for (Index z : slices) windowed.push_back(window_slice(vol.voxels.slice(z)));
  return median_params(predict_alignment(net, windowed));
}

}  // namespace sean
