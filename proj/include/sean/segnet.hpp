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
#include <random>
#include <string>
#include <vector>

#include "sean/attention.hpp"
#include "sean/nn/layers.hpp"
#include "sean/nn/ops.hpp"

namespace sean {

/// How bilateral information enters the network.
enum class FusionMode {
  None,           // plain HybridUnet
  ImageL1,        // |A - hflip(A)| appended as a second input channel
  FeatureL1,      // bridge centre concatenated with |X - hflip(X)|
  FeatureConcat,  // bridge centres of the slab and of its mirror (shared encoder)
  Sea,            // symmetry-enhanced attention
  SeaSelfOnly,    // attention without the mirrored branch
};

/// CLI spelling: none, im-l1, ft-l1, ft-cc, sea, sea-self.
const char* to_string(FusionMode mode);
FusionMode parse_fusion(const std::string& name);

inline constexpr Index kEncoderBlocks = 5;
inline constexpr Index kDecoderBlocks = 4;

struct SegConfig {
  Index base_width = 16;
  Index radius = 1;  // slab half-depth T
  FusionMode fusion = FusionMode::Sea;
  PartitionSpec partition{2, 2};
  Index attention_radius = 1;
  double d_ratio = 0.5;

  Index slab_depth() const { return 2 * radius + 1; }
  Index bridge_channels() const { return base_width << (kEncoderBlocks - 1); }
  Index input_channels() const { return fusion == FusionMode::ImageL1 ? 2 : 1; }
  bool uses_attention() const { return fusion == FusionMode::Sea || fusion == FusionMode::SeaSelfOnly; }
  AttentionConfig attention() const {
    return AttentionConfig::make(bridge_channels(), d_ratio, attention_radius, partition,
                                 fusion == FusionMode::Sea);
  }

  void validate() const {
    require(base_width >= 1, "model.base_width must be >= 1");
    require(radius >= 0, "model.T must be >= 0");
    require(attention_radius >= 0 && attention_radius <= radius, "attention.T must lie in [0, model.T]");
    require(d_ratio > 0.0 && d_ratio <= 1.0, "attention.d_ratio must lie in (0, 1]");
    require(partition.P >= 1 && partition.Q >= 1, "attention.P and attention.Q must be >= 1");
  }
};

namespace detail {

/// c3d-bn-relu-c3d-bn-relu[-maxpool(1,2,2)]
template <typename Scalar>
struct EncoderBlock {
  nn::Conv3d<Scalar> conv1, conv2;
  nn::BatchNorm<Scalar> bn1, bn2;
  nn::ReLU<Scalar> relu1, relu2;
  nn::MaxPool2<Scalar> pool;
  bool pooled = true;

  EncoderBlock(const std::string& name, Index in, Index out, bool pooled_)
      : conv1(name + ".conv1", in, out, {3, 3, 3}),
        conv2(name + ".conv2", out, out, {3, 3, 3}),
        bn1(name + ".bn1", out),
        bn2(name + ".bn2", out),
        pooled(pooled_) {}

  void init(std::mt19937_64& rng) {
    conv1.init_he(rng);
    conv2.init_he(rng);
  }
  void set_training(bool t) {
    bn1.set_training(t);
    bn2.set_training(t);
  }
  void collect(nn::ParamRefs<Scalar>& p) {
    conv1.collect(p);
    bn1.collect(p);
    conv2.collect(p);
    bn2.collect(p);
  }
  /// Returns the block output; `features` receives the pre-pool activation.
  Tensor<Scalar> forward(const Tensor<Scalar>& x, Tensor<Scalar>& features) {
    features = relu2.forward(bn2.forward(conv2.forward(relu1.forward(bn1.forward(conv1.forward(x))))));
    return pooled ? pool.forward(features) : features;
  }
  /// d_features adds the gradient reaching the pre-pool activation through the skip path.
  Tensor<Scalar> backward(const Tensor<Scalar>& d_out, const Tensor<Scalar>* d_features) {
    Tensor<Scalar> g = pooled ? pool.backward(d_out) : d_out;
    if (d_features != nullptr) g = nn::add(g, *d_features);
    return conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(relu2.backward(g))))));
  }
};

/// up x2 - concat(skip) - conv-bn-relu-conv-bn-relu, all 2D.
template <typename Scalar>
struct DecoderBlock {
  nn::Upsample2<Scalar> up;
  nn::Conv3d<Scalar> conv1, conv2;
  nn::BatchNorm<Scalar> bn1, bn2;
  nn::ReLU<Scalar> relu1, relu2;
  Index up_channels = 0;

  DecoderBlock(const std::string& name, Index in, Index skip, Index out)
      : conv1(name + ".conv1", in + skip, out, {1, 3, 3}),
        conv2(name + ".conv2", out, out, {1, 3, 3}),
        bn1(name + ".bn1", out),
        bn2(name + ".bn2", out),
        up_channels(in) {}

  void init(std::mt19937_64& rng) {
    conv1.init_he(rng);
    conv2.init_he(rng);
  }
  void set_training(bool t) {
    bn1.set_training(t);
    bn2.set_training(t);
  }
  void collect(nn::ParamRefs<Scalar>& p) {
    conv1.collect(p);
    bn1.collect(p);
    conv2.collect(p);
    bn2.collect(p);
  }
  Tensor<Scalar> forward(const Tensor<Scalar>& x, const Tensor<Scalar>& skip) {
    const auto cat = nn::concat_channels(up.forward(x), skip);
    return relu2.forward(bn2.forward(conv2.forward(relu1.forward(bn1.forward(conv1.forward(cat))))));
  }
  /// Returns (d x, d skip).
  std::pair<Tensor<Scalar>, Tensor<Scalar>> backward(const Tensor<Scalar>& dy) {
    const auto d_cat = conv1.backward(bn1.backward(relu1.backward(conv2.backward(bn2.backward(relu2.backward(dy))))));
    return {up.backward(nn::slice_channels(d_cat, 0, up_channels)),
            nn::slice_channels(d_cat, up_channels, d_cat.c() - up_channels)};
  }
};

}  // namespace detail

template <typename Scalar>
struct EncoderOutput {
  Tensor<Scalar> bridge;          // N x C x (2T+1) x H/16 x W/16
  Tensor<Scalar> flipped_bridge;  // same, for the mirrored slab (ft-cc only)
  std::vector<Tensor<Scalar>> skips;  // centre-depth stage features, finest first
};

/// HybridUnet: 3D encoder over the slab, bridge fusion, 2D decoder that
/// labels the centre slice. Returns one logit channel.
template <typename Scalar>
class SegModel {
 public:
  explicit SegModel(const SegConfig& cfg, std::uint64_t seed = 0) : cfg_(cfg) {
    cfg_.validate();
    std::mt19937_64 rng(seed);
    const Index b = cfg.base_width;
    Index in = cfg.input_channels();
    for (Index k = 0; k < kEncoderBlocks; ++k) {
      const Index out = b << k;
      encoder_.emplace_back("enc" + std::to_string(k + 1), in, out, k + 1 < kEncoderBlocks);
      encoder_.back().init(rng);
      in = out;
    }
    const Index c = cfg.bridge_channels();
    if (cfg.fusion == FusionMode::FeatureL1 || cfg.fusion == FusionMode::FeatureConcat) {
      fuse_ = nn::Conv3d<Scalar>("fuse", 2 * c, c, {1, 1, 1});
      fuse_.init_he(rng);
    }
    if (cfg.uses_attention()) attention_ = SymmetryAttention<Scalar>("attn", cfg.attention(), rng());
    for (Index i = 0; i < kDecoderBlocks; ++i) {
      const Index skip = b << (kDecoderBlocks - 1 - i);
      decoder_.emplace_back("dec" + std::to_string(i + 1), in, skip, skip);
      decoder_.back().init(rng);
      in = skip;
    }
    head_ = nn::Conv3d<Scalar>("head", b, 1, {1, 1, 1});
    head_.init_he(rng);
  }

  const SegConfig& config() const { return cfg_; }
  SymmetryAttention<Scalar>& attention() { return attention_; }

  void set_training(bool training) {
    for (auto& e : encoder_) e.set_training(training);
    for (auto& d : decoder_) d.set_training(training);
  }

  nn::ParamRefs<Scalar> parameters() {
    nn::ParamRefs<Scalar> p;
    for (auto& e : encoder_) e.collect(p);
    if (cfg_.fusion == FusionMode::FeatureL1 || cfg_.fusion == FusionMode::FeatureConcat) fuse_.collect(p);
    if (cfg_.uses_attention()) attention_.collect(p);
    for (auto& d : decoder_) d.collect(p);
    head_.collect(p);
    return p;
  }

  /// Number of trainable scalars.
  Index parameter_count() {
    Index n = 0;
    for (auto* p : parameters())
      if (p->trainable) n += p->size();
    return n;
  }

  void check_input(const Tensor<Scalar>& slab) const {
    if (slab.c() != 1)
      fail(ErrorKind::InvalidArgument, "segmentation input: expected 1 channel, got " + std::to_string(slab.c()));
    if (slab.d() != cfg_.slab_depth())
      fail(ErrorKind::InvalidArgument, "segmentation input: slab depth " + std::to_string(slab.d()) +
                                           " does not match 2T+1 = " + std::to_string(cfg_.slab_depth()));
    const Index m = Index(1) << (kEncoderBlocks - 1);
    if (slab.h() % m != 0 || slab.w() % m != 0 || slab.h() == 0 || slab.w() == 0)
      fail(ErrorKind::InvalidArgument, "segmentation input: slice size " + std::to_string(slab.h()) + "x" +
                                           std::to_string(slab.w()) + " is not divisible by 16");
  }

  /// slab: N x 1 x (2T+1) x H x W.
  EncoderOutput<Scalar> encode(const Tensor<Scalar>& slab) {
    check_input(slab);
    batch_ = slab.n();
    Tensor<Scalar> x = slab;
    if (cfg_.fusion == FusionMode::ImageL1) {
      Tensor<Scalar> diff = nn::hflip(slab);
      diff.array() = (slab.array() - diff.array()).abs();
      x = nn::concat_channels(slab, diff);
    }
    if (cfg_.fusion == FusionMode::FeatureConcat) x = nn::concat_batch(x, nn::hflip(x));
    features_.assign(kEncoderBlocks, Tensor<Scalar>());
    for (Index k = 0; k < kEncoderBlocks; ++k) x = encoder_[k].forward(x, features_[k]);
    bridge_shape_ = x.shape();

    EncoderOutput<Scalar> out;
    for (Index k = 0; k + 1 < kEncoderBlocks; ++k) {
      const auto& f = features_[k];
      out.skips.push_back(nn::take_depth(f.n() == batch_ ? f : nn::slice_batch(f, 0, batch_), cfg_.radius));
    }
    if (cfg_.fusion == FusionMode::FeatureConcat) {
      out.bridge = nn::slice_batch(x, 0, batch_);
      out.flipped_bridge = nn::slice_batch(x, batch_, batch_);
    } else {
      out.bridge = std::move(x);
    }
    return out;
  }

  /// Centre feature N x C x 1 x h x w after the configured fusion.
  Tensor<Scalar> fuse(const EncoderOutput<Scalar>& enc) {
    const Index T = cfg_.radius;
    switch (cfg_.fusion) {
      case FusionMode::None:
      case FusionMode::ImageL1:
        return nn::take_depth(enc.bridge, T);
      case FusionMode::FeatureL1: {
        centre_ = nn::take_depth(enc.bridge, T);
        Tensor<Scalar> diff = nn::hflip(centre_);
        diff.array() = (centre_.array() - diff.array()).abs();
        return fuse_.forward(nn::concat_channels(centre_, diff));
      }
      case FusionMode::FeatureConcat:
        if (enc.flipped_bridge.empty())
          fail(ErrorKind::InvalidArgument, "ft-cc fusion needs the mirrored-slab bridge features");
        return fuse_.forward(nn::concat_channels(nn::take_depth(enc.bridge, T), nn::take_depth(enc.flipped_bridge, T)));
      case FusionMode::Sea:
      case FusionMode::SeaSelfOnly:
        return attention_.forward(enc.bridge);
    }
    fail(ErrorKind::InvalidArgument, "unknown fusion mode");
  }

  Tensor<Scalar> decode(const Tensor<Scalar>& centre, const std::vector<Tensor<Scalar>>& skips) {
    Tensor<Scalar> x = centre;
    for (Index i = 0; i < kDecoderBlocks; ++i) x = decoder_[i].forward(x, skips[kDecoderBlocks - 1 - i]);
    return head_.forward(x);
  }

  /// Logits N x 1 x 1 x H x W for the centre slice of each slab.
  Tensor<Scalar> forward(const Tensor<Scalar>& slab) {
    const auto enc = encode(slab);
    return decode(fuse(enc), enc.skips);
  }

  /// Back-propagates d loss / d logits of the last forward call into the
  /// parameter gradients.
  void backward(const Tensor<Scalar>& d_logits) {
    const Index T = cfg_.radius;
    Tensor<Scalar> dx = head_.backward(d_logits);
    std::vector<Tensor<Scalar>> d_skips(kDecoderBlocks);
    for (Index i = kDecoderBlocks - 1; i >= 0; --i) {
      auto [d_in, d_skip] = decoder_[i].backward(dx);
      dx = std::move(d_in);
      d_skips[kDecoderBlocks - 1 - i] = std::move(d_skip);
    }

    Tensor<Scalar> d_bridge;
    switch (cfg_.fusion) {
      case FusionMode::None:
      case FusionMode::ImageL1:
        d_bridge = nn::put_depth(dx, bridge_shape_, T);
        break;
      case FusionMode::FeatureL1: {
        const auto d_cat = fuse_.backward(dx);
        const Index c = centre_.c();
        Tensor<Scalar> d_centre = nn::slice_channels(d_cat, 0, c);
        Tensor<Scalar> signed_diff = nn::slice_channels(d_cat, c, c);
        const Tensor<Scalar> mirrored = nn::hflip(centre_);
        signed_diff.array() *= (centre_.array() - mirrored.array()).sign();
        d_centre.array() += signed_diff.array() - nn::hflip(signed_diff).array();
        d_bridge = nn::put_depth(d_centre, bridge_shape_, T);
        break;
      }
      case FusionMode::FeatureConcat: {
        const auto d_cat = fuse_.backward(dx);
        const Index c = bridge_shape_.c;
        Shape5 half = bridge_shape_;
        half.n = batch_;
        d_bridge = nn::concat_batch(nn::put_depth(nn::slice_channels(d_cat, 0, c), half, T),
                                    nn::put_depth(nn::slice_channels(d_cat, c, c), half, T));
        break;
      }
      case FusionMode::Sea:
      case FusionMode::SeaSelfOnly:
        d_bridge = attention_.backward(dx);
        break;
    }

    Tensor<Scalar> g = std::move(d_bridge);
    for (Index k = kEncoderBlocks - 1; k >= 0; --k) {
      if (k + 1 < kEncoderBlocks) {
        Shape5 fs = features_[k].shape();
        Shape5 half = fs;
        half.n = batch_;
        Tensor<Scalar> d_feat = nn::put_depth(d_skips[k], half, T);
        if (fs.n != batch_) d_feat = nn::concat_batch(d_feat, Tensor<Scalar>(half));
        g = encoder_[k].backward(g, &d_feat);
      } else {
        g = encoder_[k].backward(g, nullptr);
      }
    }
  }

 private:
  SegConfig cfg_;
  std::vector<detail::EncoderBlock<Scalar>> encoder_;
  std::vector<detail::DecoderBlock<Scalar>> decoder_;
  nn::Conv3d<Scalar> fuse_;
  SymmetryAttention<Scalar> attention_;
  nn::Conv3d<Scalar> head_;

  Index batch_ = 0;
  Shape5 bridge_shape_;
  std::vector<Tensor<Scalar>> features_;
  Tensor<Scalar> centre_;
};

/// Copies every parameter of `from` whose name and shape also exist in `to`.
/// Returns the number of tensors copied.
template <typename Scalar>
Index transplant_parameters(SegModel<Scalar>& from, SegModel<Scalar>& to) {
  Index copied = 0;
  const auto src = from.parameters();
  for (auto* dst : to.parameters())
    for (auto* s : src)
      if (s->name == dst->name && s->shape == dst->shape) {
        dst->value = s->value;
        ++copied;
        break;
      }
  return copied;
}

}  // namespace sean
