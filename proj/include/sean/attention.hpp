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

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sean/nn/layers.hpp"
#include "sean/nn/ops.hpp"

namespace sean {

/// P x Q grid of equal blocks over an H x W map.
struct PartitionSpec {
  Index P = 2;
  Index Q = 2;

  void validate_for(Index height, Index width) const {
    require(P >= 1 && Q >= 1, "partition P and Q must be >= 1");
    if (height % P != 0 || width % Q != 0)
      fail(ErrorKind::InvalidArgument, "partition " + std::to_string(P) + "x" + std::to_string(Q) +
                                           " does not divide feature map " + std::to_string(height) + "x" +
                                           std::to_string(width));
  }
};

/// Splits every H x W plane into P*Q blocks, returned row-major over (j, k).
template <typename Scalar>
std::vector<Tensor<Scalar>> partition(const Tensor<Scalar>& x, const PartitionSpec& spec) {
  spec.validate_for(x.h(), x.w());
  const Index bh = x.h() / spec.P, bw = x.w() / spec.Q;
  std::vector<Tensor<Scalar>> blocks;
  for (Index j = 0; j < spec.P; ++j)
    for (Index k = 0; k < spec.Q; ++k) {
      Tensor<Scalar> b(x.n(), x.c(), x.d(), bh, bw);
      for (Index n = 0; n < x.n(); ++n)
        for (Index c = 0; c < x.c(); ++c)
          for (Index d = 0; d < x.d(); ++d) b.plane(n, c, d) = x.plane(n, c, d).block(j * bh, k * bw, bh, bw);
      blocks.push_back(std::move(b));
    }
  return blocks;
}

template <typename Scalar>
Tensor<Scalar> unpartition(const std::vector<Tensor<Scalar>>& blocks, const PartitionSpec& spec) {
  require(static_cast<Index>(blocks.size()) == spec.P * spec.Q && !blocks.empty(),
          "unpartition: expected P*Q blocks");
  const Shape5 bs = blocks.front().shape();
  for (const auto& b : blocks) require(b.shape() == bs, "unpartition: blocks differ in shape");
  Tensor<Scalar> x(bs.n, bs.c, bs.d, bs.h * spec.P, bs.w * spec.Q);
  for (Index j = 0; j < spec.P; ++j)
    for (Index k = 0; k < spec.Q; ++k) {
      const auto& b = blocks[j * spec.Q + k];
      for (Index n = 0; n < bs.n; ++n)
        for (Index c = 0; c < bs.c; ++c)
          for (Index d = 0; d < bs.d; ++d) x.plane(n, c, d).block(j * bs.h, k * bs.w, bs.h, bs.w) = b.plane(n, c, d);
    }
  return x;
}

/// Horizontal mirror of a feature map.
template <typename Scalar>
Tensor<Scalar> hflip_features(const Tensor<Scalar>& x) {
  return nn::hflip(x);
}

/// Row-wise softmax of (queries^T keys) / sqrt(d); queries and keys are d x N.
template <typename Scalar>
RowMatrix<Scalar> attention_similarity(const RowMatrix<Scalar>& queries, const RowMatrix<Scalar>& keys) {
  require(queries.rows() == keys.rows() && queries.cols() == keys.cols() && queries.rows() >= 1,
          "attention_similarity: query/key shapes disagree");
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(queries.rows()));
  RowMatrix<Scalar> s = (queries.transpose() * keys) * scale;
  for (Index m = 0; m < s.rows(); ++m) {
    auto row = s.row(m).array();
    row = (row - row.maxCoeff()).exp();
    row /= row.sum();
  }
  return s;
}

struct AttentionConfig {
  Index channels = 0;
  Index reduced = 0;     // d, channels of theta/phi
  Index radius = 1;      // T, neighbouring feature slices on each side
  PartitionSpec partition;
  bool symmetry = true;  // false: self-attention only

  static AttentionConfig make(Index channels, double d_ratio, Index radius, PartitionSpec partition,
                              bool symmetry) {
    AttentionConfig cfg{channels, std::max<Index>(1, static_cast<Index>(std::lround(channels * d_ratio))), radius,
                        partition, symmetry};
    cfg.validate();
    return cfg;
  }

  Index value_channels() const { return channels / 2; }

  void validate() const {
    require(channels >= 2 && channels % 2 == 0, "attention channels must be even and >= 2");
    require(reduced >= 1, "attention reduced channels d must be >= 1");
    require(radius >= 0, "attention radius T must be >= 0");
    require(partition.P >= 1 && partition.Q >= 1, "attention P and Q must be >= 1");
  }
};

/// Symmetry-enhanced attention over the bridge features of a slab.
///
/// For every partition block of the centre slice, attends to the same block
/// of each neighbouring slice (self branch) and to the same block of each
/// horizontally mirrored neighbour (symmetry branch). Each branch has its
/// own softmax. The two C/2-channel branch outputs are concatenated, mapped
/// back to C channels by a 1x1 output projection, and added to the centre
/// features. The output projection starts at zero.
template <typename Scalar>
class SymmetryAttention {
 public:
  SymmetryAttention() = default;
  SymmetryAttention(const std::string& name, const AttentionConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const Index c = cfg.channels, d = cfg.reduced, c2 = cfg.value_channels();
    theta_ = nn::Conv3d<Scalar>(name + ".theta", c, d, {1, 1, 1});
    phi_ = nn::Conv3d<Scalar>(name + ".phi", c, d, {1, 1, 1});
    g_ = nn::Conv3d<Scalar>(name + ".g", c, c2, {1, 1, 1});
    if (cfg.symmetry) h_ = nn::Conv3d<Scalar>(name + ".h", c, c2, {1, 1, 1});
    out_ = nn::Conv3d<Scalar>(name + ".out", cfg.symmetry ? 2 * c2 : c2, c, {1, 1, 1});
    std::mt19937_64 rng(seed);
    for (auto* conv : projections()) init_uniform(*conv, rng);
  }

  const AttentionConfig& config() const { return cfg_; }
  nn::Conv3d<Scalar>& theta() { return theta_; }
  nn::Conv3d<Scalar>& phi() { return phi_; }
  nn::Conv3d<Scalar>& g() { return g_; }
  nn::Conv3d<Scalar>& h() { return h_; }
  nn::Conv3d<Scalar>& out() { return out_; }

  void collect(nn::ParamRefs<Scalar>& p) {
    for (auto* conv : projections()) conv->collect(p);
    out_.collect(p);
  }

  /// bridge: N x C x D x H x W with odd D. Returns N x C x 1 x H x W.
  Tensor<Scalar> forward(const Tensor<Scalar>& bridge) {
    const Index N = bridge.n(), C = bridge.c(), D = bridge.d(), H = bridge.h(), W = bridge.w();
    if (C != cfg_.channels)
      fail(ErrorKind::InvalidArgument, "attention: configured for " + std::to_string(cfg_.channels) +
                                           " channels, feature stack has " + std::to_string(C));
    require(D % 2 == 1, "attention: feature stack depth must be odd");
    const Index center = D / 2, T = cfg_.radius, S = 2 * T + 1;
    require(T <= center, "attention: radius T exceeds the feature stack depth");
    cfg_.partition.validate_for(H, W);
    in_shape_ = bridge.shape();

    Tensor<Scalar> stack(N, C, S, H, W);
    for (Index n = 0; n < N; ++n)
      for (Index c = 0; c < C; ++c)
        for (Index t = 0; t < S; ++t) stack.plane(n, c, t) = bridge.plane(n, c, center - T + t);
    const Tensor<Scalar> centre = nn::take_depth(bridge, center);

    q_ = theta_.forward(centre);
    k_ = phi_.forward(stack);
    v_ = g_.forward(stack);
    if (cfg_.symmetry) {
      kf_ = nn::hflip(k_);
      vf_ = h_.forward(nn::hflip(stack));
    }

    const Index c2 = cfg_.value_channels();
    Tensor<Scalar> y(N, cfg_.symmetry ? 2 * c2 : c2, 1, H, W);
    sims_.clear();
    for (Index n = 0; n < N; ++n)
      for (Index j = 0; j < cfg_.partition.P; ++j)
        for (Index k = 0; k < cfg_.partition.Q; ++k) {
          const RowMatrix<Scalar> q = block(q_, n, 0, j, k);
          RowMatrix<Scalar> ys = RowMatrix<Scalar>::Zero(c2, q.cols());
          RowMatrix<Scalar> ym = RowMatrix<Scalar>::Zero(c2, q.cols());
          for (Index t = 0; t < S; ++t) {
            sims_.push_back(attention_similarity(q, block(k_, n, t, j, k)));
            ys.noalias() += block(v_, n, t, j, k) * sims_.back().transpose();
            if (cfg_.symmetry) {
              sims_.push_back(attention_similarity(q, block(kf_, n, t, j, k)));
              ym.noalias() += block(vf_, n, t, j, k) * sims_.back().transpose();
            }
          }
          put_block(y, n, 0, j, k, 0, ys);
          if (cfg_.symmetry) put_block(y, n, 0, j, k, c2, ym);
        }
    return nn::add(centre, out_.forward(y));
  }

  /// Returns d loss / d bridge and accumulates parameter gradients.
  Tensor<Scalar> backward(const Tensor<Scalar>& d_out) {
    const Index N = in_shape_.n, H = in_shape_.h, W = in_shape_.w;
    const Index center = in_shape_.d / 2, T = cfg_.radius, S = 2 * T + 1, c2 = cfg_.value_channels();
    require(d_out.n() == N && d_out.c() == cfg_.channels && d_out.d() == 1 && d_out.h() == H && d_out.w() == W,
            "attention backward: gradient shape mismatch");
    const Tensor<Scalar> dy = out_.backward(d_out);
    Tensor<Scalar> dq(q_.shape()), dk(k_.shape()), dv(v_.shape()), dkf, dvf;
    if (cfg_.symmetry) {
      dkf = Tensor<Scalar>(kf_.shape());
      dvf = Tensor<Scalar>(vf_.shape());
    }
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(cfg_.reduced));
    std::size_t s_index = 0;
    for (Index n = 0; n < N; ++n)
      for (Index j = 0; j < cfg_.partition.P; ++j)
        for (Index k = 0; k < cfg_.partition.Q; ++k) {
          const RowMatrix<Scalar> q = block(q_, n, 0, j, k);
          const RowMatrix<Scalar> dy_block = block(dy, n, 0, j, k);
          RowMatrix<Scalar> d_q = RowMatrix<Scalar>::Zero(q.rows(), q.cols());
          auto branch = [&](const Tensor<Scalar>& keys, const Tensor<Scalar>& values, Tensor<Scalar>& d_keys,
                            Tensor<Scalar>& d_values, Index t, Index row0) {
            const RowMatrix<Scalar>& sim = sims_[s_index++];
            const RowMatrix<Scalar> key = block(keys, n, t, j, k);
            const RowMatrix<Scalar> val = block(values, n, t, j, k);
            const auto dys = dy_block.middleRows(row0, c2);
            const RowMatrix<Scalar> d_sim = dys.transpose() * val;
            RowMatrix<Scalar> d_logits = sim.cwiseProduct(d_sim);
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_dot = d_logits.rowwise().sum();
            d_logits -= sim.cwiseProduct(row_dot.replicate(1, sim.cols()));
            d_logits *= scale;
            d_q.noalias() += key * d_logits.transpose();
            add_block(d_keys, n, t, j, k, q * d_logits);
            add_block(d_values, n, t, j, k, dys * sim);
          };
          for (Index t = 0; t < S; ++t) {
            branch(k_, v_, dk, dv, t, 0);
            if (cfg_.symmetry) branch(kf_, vf_, dkf, dvf, t, c2);
          }
          add_block(dq, n, 0, j, k, d_q);
        }

    Tensor<Scalar> d_centre = nn::add(d_out, theta_.backward(dq));
    if (cfg_.symmetry) dk = nn::add(dk, nn::hflip(dkf));
    Tensor<Scalar> d_stack = nn::add(phi_.backward(dk), g_.backward(dv));
    if (cfg_.symmetry) d_stack = nn::add(d_stack, nn::hflip(h_.backward(dvf)));

    Tensor<Scalar> d_bridge(in_shape_);
    for (Index n = 0; n < N; ++n)
      for (Index c = 0; c < in_shape_.c; ++c) {
        for (Index t = 0; t < S; ++t) d_bridge.plane(n, c, center - T + t) += d_stack.plane(n, c, t);
        d_bridge.plane(n, c, center) += d_centre.plane(n, c, 0);
      }
    return d_bridge;
  }

 private:
  std::vector<nn::Conv3d<Scalar>*> projections() {
    std::vector<nn::Conv3d<Scalar>*> p{&theta_, &phi_, &g_};
    if (cfg_.symmetry) p.push_back(&h_);
    return p;
  }

  static void init_uniform(nn::Conv3d<Scalar>& conv, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(conv.fan_in()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Index i = 0; i < conv.weight().size(); ++i) conv.weight().value[i] = static_cast<Scalar>(dist(rng));
    for (Index i = 0; i < conv.bias().size(); ++i) conv.bias().value[i] = static_cast<Scalar>(dist(rng));
  }

  // Channels x (H' W') matrix of block (j, k) at depth t, row-major within the block.
  RowMatrix<Scalar> block(const Tensor<Scalar>& x, Index n, Index t, Index j, Index k) const {
    const Index bh = x.h() / cfg_.partition.P, bw = x.w() / cfg_.partition.Q;
    RowMatrix<Scalar> m(x.c(), bh * bw);
    for (Index c = 0; c < x.c(); ++c) {
      const auto b = x.plane(n, c, t).block(j * bh, k * bw, bh, bw);
      for (Index r = 0; r < bh; ++r) m.row(c).segment(r * bw, bw) = b.row(r);
    }
    return m;
  }

  void put_block(Tensor<Scalar>& x, Index n, Index t, Index j, Index k, Index row0, const RowMatrix<Scalar>& m) const {
    const Index bh = x.h() / cfg_.partition.P, bw = x.w() / cfg_.partition.Q;
    for (Index c = 0; c < m.rows(); ++c) {
      auto b = x.plane(n, row0 + c, t).block(j * bh, k * bw, bh, bw);
      for (Index r = 0; r < bh; ++r) b.row(r) = m.row(c).segment(r * bw, bw);
    }
  }

  void add_block(Tensor<Scalar>& x, Index n, Index t, Index j, Index k, const RowMatrix<Scalar>& m) const {
    const Index bh = x.h() / cfg_.partition.P, bw = x.w() / cfg_.partition.Q;
    for (Index c = 0; c < m.rows(); ++c) {
      auto b = x.plane(n, c, t).block(j * bh, k * bw, bh, bw);
      for (Index r = 0; r < bh; ++r) b.row(r) += m.row(c).segment(r * bw, bw);
    }
  }

  AttentionConfig cfg_;
  nn::Conv3d<Scalar> theta_, phi_, g_, h_, out_;
  Shape5 in_shape_;
  Tensor<Scalar> q_, k_, v_, kf_, vf_;
  std::vector<RowMatrix<Scalar>> sims_;
};

}  // namespace sean
