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

#include "sean/rigid.hpp"

#include <cmath>

namespace sean {

bool RigidParams::finite() const { return std::isfinite(theta) && std::isfinite(tx) && std::isfinite(ty); }

Eigen::Matrix<double, 2, 3> rigid_matrix(const RigidParams& alpha, Index height, Index width) {
  require(height >= 2 && width >= 2, "rigid_matrix: image must be at least 2x2");
  const double sx = 0.5 * static_cast<double>(width - 1);
  const double sy = 0.5 * static_cast<double>(height - 1);
  const double c = std::cos(alpha.theta), s = std::sin(alpha.theta);
  Eigen::Matrix<double, 2, 3> m;
  m << c, -s * sy / sx, alpha.tx / sx,  //
      s * sx / sy, c, alpha.ty / sy;
  return m;
}

RigidParams invert_params(const RigidParams& alpha) {
  const double c = std::cos(alpha.theta), s = std::sin(alpha.theta);
  return {-alpha.theta, -(c * alpha.tx + s * alpha.ty), s * alpha.tx - c * alpha.ty};
}

Eigen::Matrix3d invert_params_jacobian(const RigidParams& alpha) {
  const double c = std::cos(alpha.theta), s = std::sin(alpha.theta);
  Eigen::Matrix3d j;
  j << -1.0, 0.0, 0.0,                                //
      s * alpha.tx - c * alpha.ty, -c, -s,            //
      c * alpha.tx + s * alpha.ty, s, -c;
  return j;
}

namespace {

// Source coordinate of output pixel (x, y) and its derivatives w.r.t. alpha.
struct Sampler {
  double cx, cy, c, s, tx, ty;

  Sampler(const RigidParams& a, Index height, Index width)
      : cx(0.5 * static_cast<double>(width - 1)),
        cy(0.5 * static_cast<double>(height - 1)),
        c(std::cos(a.theta)),
        s(std::sin(a.theta)),
        tx(a.tx),
        ty(a.ty) {}

  void source(Index x, Index y, double& sx, double& sy, double& u, double& v) const {
    u = static_cast<double>(x) - cx - tx;
    v = static_cast<double>(y) - cy - ty;
    sx = c * u + s * v + cx;
    sy = -s * u + c * v + cy;
  }
};

template <typename Scalar>
inline double pixel(const Image<Scalar>& img, Index y, Index x) {
  if (y < 0 || x < 0 || y >= img.rows() || x >= img.cols()) return 0.0;
  return static_cast<double>(img(y, x));
}

}  // namespace

namespace detail {

template <typename Scalar>
Image<Scalar> apply_rigid(const Image<Scalar>& image, const RigidParams& alpha) {
  const Index H = image.rows(), W = image.cols();
  Image<Scalar> out(H, W);
  const Sampler smp(alpha, H, W);
  for (Index y = 0; y < H; ++y)
    for (Index x = 0; x < W; ++x) {
      double sx, sy, u, v;
      smp.source(x, y, sx, sy, u, v);
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const Index x0 = static_cast<Index>(fx0), y0 = static_cast<Index>(fy0);
      const double ax = sx - fx0, ay = sy - fy0;
      const double top = (1.0 - ax) * pixel(image, y0, x0) + ax * pixel(image, y0, x0 + 1);
      const double bottom = (1.0 - ax) * pixel(image, y0 + 1, x0) + ax * pixel(image, y0 + 1, x0 + 1);
      out(y, x) = static_cast<Scalar>((1.0 - ay) * top + ay * bottom);
    }
  return out;
}

template <typename Scalar>
Eigen::Vector3d apply_rigid_backward(const Image<Scalar>& image, const RigidParams& alpha, const Image<Scalar>& d_out,
                                     Image<Scalar>* d_image) {
  const Index H = image.rows(), W = image.cols();
  require(d_out.rows() == H && d_out.cols() == W, "apply_rigid_backward: gradient shape mismatch");
  if (d_image != nullptr && (d_image->rows() != H || d_image->cols() != W)) *d_image = Image<Scalar>::Zero(H, W);
  const Sampler smp(alpha, H, W);
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  auto scatter = [&](Index y, Index x, double value) {
    if (y < 0 || x < 0 || y >= H || x >= W) return;
    (*d_image)(y, x) += static_cast<Scalar>(value);
  };
  for (Index y = 0; y < H; ++y)
    for (Index x = 0; x < W; ++x) {
      const double g = static_cast<double>(d_out(y, x));
      if (g == 0.0) continue;
      double sx, sy, u, v;
      smp.source(x, y, sx, sy, u, v);
      const double fx0 = std::floor(sx), fy0 = std::floor(sy);
      const Index x0 = static_cast<Index>(fx0), y0 = static_cast<Index>(fy0);
      const double ax = sx - fx0, ay = sy - fy0;
      const double p00 = pixel(image, y0, x0), p01 = pixel(image, y0, x0 + 1);
      const double p10 = pixel(image, y0 + 1, x0), p11 = pixel(image, y0 + 1, x0 + 1);
      const double d_sx = (1.0 - ay) * (p01 - p00) + ay * (p11 - p10);
      const double d_sy = (1.0 - ax) * (p10 - p00) + ax * (p11 - p01);
      const double dsx_dtheta = -smp.s * u + smp.c * v;
      const double dsy_dtheta = -smp.c * u - smp.s * v;
      grad[0] += g * (d_sx * dsx_dtheta + d_sy * dsy_dtheta);
      grad[1] += g * (d_sx * -smp.c + d_sy * smp.s);
      grad[2] += g * (d_sx * -smp.s + d_sy * -smp.c);
      if (d_image != nullptr) {
        scatter(y0, x0, g * (1.0 - ax) * (1.0 - ay));
        scatter(y0, x0 + 1, g * ax * (1.0 - ay));
        scatter(y0 + 1, x0, g * (1.0 - ax) * ay);
        scatter(y0 + 1, x0 + 1, g * ax * ay);
      }
    }
  return grad;
}

template <typename Scalar>
AlignmentLoss alignment_loss(const Image<Scalar>& slice, const RigidParams& alpha, bool with_grad) {
  const double n = static_cast<double>(slice.size());
  require(n > 0, "alignment_loss: empty slice");
  const Image<Scalar> warped = apply_rigid(slice, alpha);
  const Image<Scalar> diff = warped - warped.rowwise().reverse();
  const RigidParams inverse = invert_params(alpha);
  const Image<Scalar> restored = apply_rigid(warped, inverse);
  const Image<Scalar> residual = restored - slice;

  AlignmentLoss loss;
  loss.symmetry = diff.template cast<double>().cwiseAbs().mean();
  loss.restoration = residual.template cast<double>().cwiseAbs().mean();
  loss.total = loss.symmetry + loss.restoration;
  if (!with_grad) return loss;

  const Image<Scalar> d_restored = residual.unaryExpr([n](Scalar r) {
    return static_cast<Scalar>((r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0)) / n);
  });
  // d|B - flip(B)| / dB picks up the mirrored term too, which doubles it.
  Image<Scalar> d_warped = diff.unaryExpr([n](Scalar r) {
    return static_cast<Scalar>((r > 0 ? 2.0 : (r < 0 ? -2.0 : 0.0)) / n);
  });
  const Eigen::Vector3d d_inverse = detail::apply_rigid_backward(warped, inverse, d_restored, &d_warped);
  loss.grad = invert_params_jacobian(alpha).transpose() * d_inverse;
  loss.grad += detail::apply_rigid_backward<Scalar>(slice, alpha, d_warped, nullptr);
  return loss;
}

template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& image, Index height, Index width) {
  require(height >= 1 && width >= 1 && image.size() > 0, "resize_bilinear: empty image");
  if (height == image.rows() && width == image.cols()) return image;
  auto axis = [](Index out, Index in, Index o, Index& lo, Index& hi, double& f) {
    const double src = out > 1 ? static_cast<double>(o) * static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
    lo = std::min<Index>(static_cast<Index>(std::floor(src)), in - 1);
    hi = std::min<Index>(lo + 1, in - 1);
    f = src - static_cast<double>(lo);
  };
  Image<Scalar> out(height, width);
  for (Index y = 0; y < height; ++y) {
    Index y0, y1;
    double fy;
    axis(height, image.rows(), y, y0, y1, fy);
    for (Index x = 0; x < width; ++x) {
      Index x0, x1;
      double fx;
      axis(width, image.cols(), x, x0, x1, fx);
      const double top = (1.0 - fx) * image(y0, x0) + fx * image(y0, x1);
      const double bottom = (1.0 - fx) * image(y1, x0) + fx * image(y1, x1);
      out(y, x) = static_cast<Scalar>((1.0 - fy) * top + fy * bottom);
    }
  }
  return out;
}

#define SEAN_INSTANTIATE_RIGID(S)                                                                             \
  template Image<S> apply_rigid<S>(const Image<S>&, const RigidParams&);                                     \
  template Eigen::Vector3d apply_rigid_backward<S>(const Image<S>&, const RigidParams&, const Image<S>&,     \
                                                   Image<S>*);                                               \
  template AlignmentLoss alignment_loss<S>(const Image<S>&, const RigidParams&, bool);                       \
  template Image<S> resize_bilinear<S>(const Image<S>&, Index, Index);

SEAN_INSTANTIATE_RIGID(float)
SEAN_INSTANTIATE_RIGID(double)
#undef SEAN_INSTANTIATE_RIGID

}  // namespace detail
}  // namespace sean
