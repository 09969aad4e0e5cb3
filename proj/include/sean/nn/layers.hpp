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

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sean/tensor.hpp"

namespace sean::nn {

template <typename Scalar>
struct Parameter {
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  std::string name;
  std::vector<Index> shape;
  Array value;
  Array grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string name_, std::vector<Index> shape_, bool trainable_ = true)
      : name(std::move(name_)), shape(std::move(shape_)), trainable(trainable_) {
    Index n = 1;
    for (Index s : shape) n *= s;
    value = Array::Zero(n);
    grad = Array::Zero(n);
  }

  Index size() const { return value.size(); }
};

template <typename Scalar>
using ParamRefs = std::vector<Parameter<Scalar>*>;

template <typename Scalar>
void zero_grads(const ParamRefs<Scalar>& params) {
  for (auto* p : params) p->grad.setZero();
}

/// Copies values between two identically named parameter lists.
template <typename Scalar>
void copy_values(const ParamRefs<Scalar>& from, const ParamRefs<Scalar>& to) {
  require(from.size() == to.size(), "parameter list size mismatch");
  for (std::size_t i = 0; i < from.size(); ++i) {
    require(from[i]->shape == to[i]->shape, "parameter shape mismatch: " + from[i]->name);
    to[i]->value = from[i]->value;
  }
}

/// Stride-1 convolution over N x C x D x H x W with "same" zero padding.
/// A 2D convolution is a kernel of depth 1.
template <typename Scalar>
class Conv3d {
 public:
  using Kernel = std::array<Index, 3>;

  Conv3d() = default;
  Conv3d(const std::string& name, Index in_channels, Index out_channels, Kernel kernel, bool bias = true)
      : in_(in_channels),
        out_(out_channels),
        kernel_(kernel),
        weight_(name + ".weight", {out_channels, in_channels, kernel[0], kernel[1], kernel[2]}),
        bias_(name + ".bias", {bias ? out_channels : 0}) {
    require(in_channels > 0 && out_channels > 0, "conv channels must be positive");
    for (Index k : kernel) require(k > 0 && k % 2 == 1, "conv kernel sizes must be odd");
  }

  Index in_channels() const { return in_; }
  Index out_channels() const { return out_; }
  Index fan_in() const { return in_ * kernel_[0] * kernel_[1] * kernel_[2]; }
  bool is_pointwise() const { return kernel_[0] == 1 && kernel_[1] == 1 && kernel_[2] == 1; }

  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  /// He-uniform weights, zero bias.
  void init_he(std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Index i = 0; i < weight_.size(); ++i) weight_.value[i] = static_cast<Scalar>(dist(rng));
    bias_.value.setZero();
  }

  void collect(ParamRefs<Scalar>& out) {
    out.push_back(&weight_);
    if (bias_.size() > 0) out.push_back(&bias_);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require(x.c() == in_, "conv " + weight_.name + ": expected " + std::to_string(in_) + " input channels, got " +
                              std::to_string(x.c()));
    input_ = x;
    Tensor<Scalar> y(x.n(), out_, x.d(), x.h(), x.w());
    const auto w = weight_matrix();
    RowMatrix<Scalar> cols;
    for (Index n = 0; n < x.n(); ++n) {
      auto yn = y.sample(n);
      if (is_pointwise()) {
        yn.noalias() = w * x.sample(n);
      } else {
        im2col(x, n, cols);
        yn.noalias() = w * cols;
      }
      if (bias_.size() > 0) yn.colwise() += bias_.value.matrix();
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    const Tensor<Scalar>& x = input_;
    require(dy.n() == x.n() && dy.c() == out_ && dy.d() == x.d() && dy.h() == x.h() && dy.w() == x.w(),
            "conv backward: gradient shape mismatch");
    Tensor<Scalar> dx(x.shape());
    const auto w = weight_matrix();
    auto dw = Eigen::Map<RowMatrix<Scalar>>(weight_.grad.data(), out_, fan_in());
    RowMatrix<Scalar> cols, dcols;
    for (Index n = 0; n < x.n(); ++n) {
      const auto dyn = dy.sample(n);
      if (is_pointwise()) {
        dw.noalias() += dyn * x.sample(n).transpose();
        dx.sample(n).noalias() = w.transpose() * dyn;
      } else {
        im2col(x, n, cols);
        dw.noalias() += dyn * cols.transpose();
        dcols.noalias() = w.transpose() * dyn;
        col2im(dcols, n, dx);
      }
      if (bias_.size() > 0) bias_.grad.matrix() += dyn.rowwise().sum();
    }
    return dx;
  }

 private:
  Eigen::Map<const RowMatrix<Scalar>> weight_matrix() const {
    return Eigen::Map<const RowMatrix<Scalar>>(weight_.value.data(), out_, fan_in());
  }

  void im2col(const Tensor<Scalar>& x, Index n, RowMatrix<Scalar>& cols) const {
    const Index D = x.d(), H = x.h(), W = x.w();
    const Index pd = kernel_[0] / 2, ph = kernel_[1] / 2, pw = kernel_[2] / 2;
    cols.resize(fan_in(), D * H * W);
    Index row = 0;
    for (Index c = 0; c < in_; ++c)
      for (Index a = 0; a < kernel_[0]; ++a)
        for (Index b = 0; b < kernel_[1]; ++b)
          for (Index e = 0; e < kernel_[2]; ++e, ++row) {
            Scalar* dst = cols.row(row).data();
            const Index w_lo = std::max<Index>(0, pw - e);
            const Index w_hi = std::min<Index>(W, W + pw - e);
            for (Index d = 0; d < D; ++d) {
              const Index sd = d + a - pd;
              for (Index h = 0; h < H; ++h, dst += W) {
                const Index sh = h + b - ph;
                if (sd < 0 || sd >= D || sh < 0 || sh >= H) {
                  std::fill(dst, dst + W, Scalar(0));
                  continue;
                }
                const Scalar* src = x.data() + x.offset(n, c, sd, sh, 0) + (e - pw);
                std::fill(dst, dst + w_lo, Scalar(0));
                std::copy(src + w_lo, src + w_hi, dst + w_lo);
                std::fill(dst + w_hi, dst + W, Scalar(0));
              }
            }
          }
  }

  void col2im(const RowMatrix<Scalar>& cols, Index n, Tensor<Scalar>& dx) const {
    const Index D = dx.d(), H = dx.h(), W = dx.w();
    const Index pd = kernel_[0] / 2, ph = kernel_[1] / 2, pw = kernel_[2] / 2;
    Index row = 0;
    for (Index c = 0; c < in_; ++c)
      for (Index a = 0; a < kernel_[0]; ++a)
        for (Index b = 0; b < kernel_[1]; ++b)
          for (Index e = 0; e < kernel_[2]; ++e, ++row) {
            const Scalar* src = cols.row(row).data();
            const Index w_lo = std::max<Index>(0, pw - e);
            const Index w_hi = std::min<Index>(W, W + pw - e);
            for (Index d = 0; d < D; ++d) {
              const Index sd = d + a - pd;
              for (Index h = 0; h < H; ++h, src += W) {
                const Index sh = h + b - ph;
                if (sd < 0 || sd >= D || sh < 0 || sh >= H) continue;
                Scalar* dst = dx.data() + dx.offset(n, c, sd, sh, 0) + (e - pw);
                for (Index i = w_lo; i < w_hi; ++i) dst[i] += src[i];
              }
            }
          }
  }

  Index in_ = 0, out_ = 0;
  Kernel kernel_{1, 1, 1};
  Parameter<Scalar> weight_;
  Parameter<Scalar> bias_;
  Tensor<Scalar> input_;
};

/// Batch normalization over N, D, H, W per channel.
template <typename Scalar>
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(const std::string& name, Index channels, double momentum = 0.1, double eps = 1e-5)
      : channels_(channels),
        momentum_(momentum),
        eps_(eps),
        gamma_(name + ".gamma", {channels}),
        beta_(name + ".beta", {channels}),
        running_mean_(name + ".running_mean", {channels}, false),
        running_var_(name + ".running_var", {channels}, false) {
    gamma_.value.setOnes();
    running_var_.value.setOnes();
  }

  void set_training(bool training) { training_ = training; }
  bool training() const { return training_; }

  void collect(ParamRefs<Scalar>& out) {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&running_mean_);
    out.push_back(&running_var_);
  }

  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require(x.c() == channels_, "batchnorm " + gamma_.name + ": channel mismatch");
    const Index S = x.shape().spatial();
    const Index M = x.n() * S;
    require(M > 0, "batchnorm: empty input");
    xhat_ = Tensor<Scalar>(x.shape());
    inv_std_.resize(channels_);
    Tensor<Scalar> y(x.shape());
    for (Index c = 0; c < channels_; ++c) {
      double mean, var;
      if (training_) {
        double sum = 0.0;
        for (Index n = 0; n < x.n(); ++n) sum += x.sample(n).row(c).template cast<double>().sum();
        mean = sum / static_cast<double>(M);
        double sq = 0.0;
        for (Index n = 0; n < x.n(); ++n)
          sq += (x.sample(n).row(c).template cast<double>().array() - mean).square().sum();
        var = sq / static_cast<double>(M);
        const double unbiased = M > 1 ? sq / static_cast<double>(M - 1) : var;
        running_mean_.value[c] = static_cast<Scalar>((1.0 - momentum_) * running_mean_.value[c] + momentum_ * mean);
        running_var_.value[c] = static_cast<Scalar>((1.0 - momentum_) * running_var_.value[c] + momentum_ * unbiased);
      } else {
        mean = running_mean_.value[c];
        var = running_var_.value[c];
      }
      const Scalar inv_std = static_cast<Scalar>(1.0 / std::sqrt(var + eps_));
      inv_std_[c] = inv_std;
      const Scalar m = static_cast<Scalar>(mean);
      for (Index n = 0; n < x.n(); ++n) {
        auto xh = xhat_.sample(n).row(c);
        xh = ((x.sample(n).row(c).array() - m) * inv_std).matrix();
        y.sample(n).row(c) = (xh.array() * gamma_.value[c] + beta_.value[c]).matrix();
      }
    }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) {
    require(dy.shape() == xhat_.shape(), "batchnorm backward: gradient shape mismatch");
    const Index M = dy.n() * dy.shape().spatial();
    Tensor<Scalar> dx(dy.shape());
    for (Index c = 0; c < channels_; ++c) {
      Scalar sum_dy = 0, sum_dy_xhat = 0;
      for (Index n = 0; n < dy.n(); ++n) {
        sum_dy += dy.sample(n).row(c).sum();
        sum_dy_xhat += dy.sample(n).row(c).dot(xhat_.sample(n).row(c));
      }
      beta_.grad[c] += sum_dy;
      gamma_.grad[c] += sum_dy_xhat;
      const Scalar g = gamma_.value[c] * inv_std_[c];
      for (Index n = 0; n < dy.n(); ++n) {
        if (training_) {
          const Scalar mean_dy = sum_dy / static_cast<Scalar>(M);
          const Scalar mean_dy_xhat = sum_dy_xhat / static_cast<Scalar>(M);
          dx.sample(n).row(c) =
              (g * (dy.sample(n).row(c).array() - mean_dy - xhat_.sample(n).row(c).array() * mean_dy_xhat)).matrix();
        } else {
          dx.sample(n).row(c) = g * dy.sample(n).row(c);
        }
      }
    }
    return dx;
  }

 private:
  Index channels_ = 0;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  bool training_ = true;
  Parameter<Scalar> gamma_, beta_, running_mean_, running_var_;
  Tensor<Scalar> xhat_;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> inv_std_;
};

template <typename Scalar>
class ReLU {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    output_ = x;
    output_.array() = output_.array().max(Scalar(0));
    return output_;
  }
  Tensor<Scalar> backward(const Tensor<Scalar>& dy) const {
    Tensor<Scalar> dx(dy.shape());
    dx.array() = (output_.array() > Scalar(0)).select(dy.array(), Scalar(0));
    return dx;
  }

 private:
  Tensor<Scalar> output_;
};

/// 2x2 max pooling with stride 2 in H and W; depth is left alone.
template <typename Scalar>
class MaxPool2 {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    require(x.h() % 2 == 0 && x.w() % 2 == 0,
            "maxpool: spatial size " + std::to_string(x.h()) + "x" + std::to_string(x.w()) + " is not even");
    in_shape_ = x.shape();
    Tensor<Scalar> y(x.n(), x.c(), x.d(), x.h() / 2, x.w() / 2);
    argmax_.resize(y.size());
    Index o = 0;
    for (Index n = 0; n < x.n(); ++n)
      for (Index c = 0; c < x.c(); ++c)
        for (Index d = 0; d < x.d(); ++d)
          for (Index h = 0; h < y.h(); ++h)
            for (Index w = 0; w < y.w(); ++w, ++o) {
              Index best = x.offset(n, c, d, 2 * h, 2 * w);
              for (Index dh = 0; dh < 2; ++dh)
                for (Index dw = 0; dw < 2; ++dw) {
                  const Index i = x.offset(n, c, d, 2 * h + dh, 2 * w + dw);
                  if (x.data()[i] > x.data()[best]) best = i;
                }
              argmax_[o] = best;
              y.data()[o] = x.data()[best];
            }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) const {
    Tensor<Scalar> dx(in_shape_);
    for (Index o = 0; o < dy.size(); ++o) dx.data()[argmax_[o]] += dy.data()[o];
    return dx;
  }

 private:
  Shape5 in_shape_;
  std::vector<Index> argmax_;
};

/// Bilinear x2 upsampling in H and W (half-pixel centers, edge clamped).
template <typename Scalar>
class Upsample2 {
 public:
  Tensor<Scalar> forward(const Tensor<Scalar>& x) {
    in_shape_ = x.shape();
    build_axis(x.h(), rows_);
    build_axis(x.w(), cols_);
    Tensor<Scalar> y(x.n(), x.c(), x.d(), 2 * x.h(), 2 * x.w());
    for (Index n = 0; n < x.n(); ++n)
      for (Index c = 0; c < x.c(); ++c)
        for (Index d = 0; d < x.d(); ++d) {
          const auto in = x.plane(n, c, d);
          auto out = y.plane(n, c, d);
          for (Index oy = 0; oy < y.h(); ++oy) {
            const Tap& r = rows_[oy];
            for (Index ox = 0; ox < y.w(); ++ox) {
              const Tap& q = cols_[ox];
              out(oy, ox) = (Scalar(1) - r.frac) * ((Scalar(1) - q.frac) * in(r.lo, q.lo) + q.frac * in(r.lo, q.hi)) +
                            r.frac * ((Scalar(1) - q.frac) * in(r.hi, q.lo) + q.frac * in(r.hi, q.hi));
            }
          }
        }
    return y;
  }

  Tensor<Scalar> backward(const Tensor<Scalar>& dy) const {
    Tensor<Scalar> dx(in_shape_);
    for (Index n = 0; n < dy.n(); ++n)
      for (Index c = 0; c < dy.c(); ++c)
        for (Index d = 0; d < dy.d(); ++d) {
          const auto g = dy.plane(n, c, d);
          auto out = dx.plane(n, c, d);
          for (Index oy = 0; oy < dy.h(); ++oy) {
            const Tap& r = rows_[oy];
            for (Index ox = 0; ox < dy.w(); ++ox) {
              const Tap& q = cols_[ox];
              const Scalar v = g(oy, ox);
              out(r.lo, q.lo) += (Scalar(1) - r.frac) * (Scalar(1) - q.frac) * v;
              out(r.lo, q.hi) += (Scalar(1) - r.frac) * q.frac * v;
              out(r.hi, q.lo) += r.frac * (Scalar(1) - q.frac) * v;
              out(r.hi, q.hi) += r.frac * q.frac * v;
            }
          }
        }
    return dx;
  }

 private:
  struct Tap {
    Index lo, hi;
    Scalar frac;
  };

  static void build_axis(Index in, std::vector<Tap>& taps) {
    taps.resize(2 * in);
    for (Index o = 0; o < 2 * in; ++o) {
      double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
      if (src < 0) src = 0;
      const Index lo = std::min<Index>(static_cast<Index>(src), in - 1);
      const Index hi = lo < in - 1 ? lo + 1 : lo;
      taps[o] = Tap{lo, hi, static_cast<Scalar>(src - static_cast<double>(lo))};
    }
  }

  Shape5 in_shape_;
  std::vector<Tap> rows_, cols_;
};

/// Fully connected layer over the flattened per-sample features.
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Index in_features, Index out_features)
      : in_(in_features),
        out_(out_features),
        weight_(name + ".weight", {out_features, in_features}),
        bias_(name + ".bias", {out_features}) {}

  Index in_features() const { return in_; }
  Index out_features() const { return out_; }
  Parameter<Scalar>& weight() { return weight_; }
  Parameter<Scalar>& bias() { return bias_; }

  void collect(ParamRefs<Scalar>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
  }

  /// Returns N x out.
  RowMatrix<Scalar> forward(const Tensor<Scalar>& x) {
    require(x.shape().per_sample() == in_, "linear " + weight_.name + ": expected " + std::to_string(in_) +
                                               " input features, got " + std::to_string(x.shape().per_sample()));
    input_ = x;
    const auto xm = flat(x);
    RowMatrix<Scalar> y = xm * weight_matrix().transpose();
    y.rowwise() += bias_.value.matrix().transpose();
    return y;
  }

  Tensor<Scalar> backward(const RowMatrix<Scalar>& dy) {
    require(dy.rows() == input_.n() && dy.cols() == out_, "linear backward: gradient shape mismatch");
    const auto xm = flat(input_);
    Eigen::Map<RowMatrix<Scalar>>(weight_.grad.data(), out_, in_).noalias() += dy.transpose() * xm;
    bias_.grad.matrix() += dy.colwise().sum().transpose();
    Tensor<Scalar> dx(input_.shape());
    Eigen::Map<RowMatrix<Scalar>>(dx.data(), input_.n(), in_).noalias() = dy * weight_matrix();
    return dx;
  }

 private:
  static Eigen::Map<const RowMatrix<Scalar>> flat(const Tensor<Scalar>& x) {
    return Eigen::Map<const RowMatrix<Scalar>>(x.data(), x.n(), x.shape().per_sample());
  }
  Eigen::Map<const RowMatrix<Scalar>> weight_matrix() const {
    return Eigen::Map<const RowMatrix<Scalar>>(weight_.value.data(), out_, in_);
  }

  Index in_ = 0, out_ = 0;
  Parameter<Scalar> weight_, bias_;
  Tensor<Scalar> input_;
};

}  // namespace sean::nn
