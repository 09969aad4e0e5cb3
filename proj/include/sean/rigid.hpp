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

#include <Eigen/Dense>

#include "sean/tensor.hpp"

namespace sean {

/// In-plane rigid transform: rotation `theta` (radians) about the image
/// centre followed by a shift of (tx, ty) pixels. Applying it moves image
/// content: a pixel at p lands at R(theta) (p - c) + c + t.
struct RigidParams {
  double theta = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Eigen::Vector3d vec() const { return {theta, tx, ty}; }
  static RigidParams from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
  bool finite() const;
  friend bool operator==(const RigidParams&, const RigidParams&) = default;
};

/// 2x3 affine of the transform in normalized [-1, 1] coordinates (pixel
/// centres at the corners, x to the right, y down).
Eigen::Matrix<double, 2, 3> rigid_matrix(const RigidParams& alpha, Index height, Index width);

RigidParams invert_params(const RigidParams& alpha);

/// d invert_params(alpha) / d alpha, rows (theta', tx', ty').
Eigen::Matrix3d invert_params_jacobian(const RigidParams& alpha);

namespace detail {
template <typename Scalar>
Image<Scalar> apply_rigid(const Image<Scalar>& image, const RigidParams& alpha);
template <typename Scalar>
Eigen::Vector3d apply_rigid_backward(const Image<Scalar>& image, const RigidParams& alpha, const Image<Scalar>& d_out,
                                     Image<Scalar>* d_image);
template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& image, Index height, Index width);
}  // namespace detail

/// Bilinear resampling of `image` under `alpha`; samples falling outside
/// the image read as zero. The identity transform is reproduced exactly.
template <typename Derived>
Image<typename Derived::Scalar> apply_rigid(const Eigen::MatrixBase<Derived>& image, const RigidParams& alpha) {
  return detail::apply_rigid<typename Derived::Scalar>(image.derived(), alpha);
}

/// Adjoint of apply_rigid. Accumulates d_out pulled back to the image into
/// `d_image` (when non-null) and returns the gradient with respect to alpha.
template <typename Scalar>
Eigen::Vector3d apply_rigid_backward(const Image<Scalar>& image, const RigidParams& alpha, const Image<Scalar>& d_out,
                                     Image<Scalar>* d_image) {
  return detail::apply_rigid_backward<Scalar>(image, alpha, d_out, d_image);
}

template <typename Derived>
Image<typename Derived::Scalar> hflip(const Eigen::MatrixBase<Derived>& image) {
  return image.rowwise().reverse();
}

/// Mean |S - hflip(S)| over the slice.
template <typename Derived>
double asymmetry(const Eigen::MatrixBase<Derived>& image) {
  return (image - image.rowwise().reverse()).template cast<double>().cwiseAbs().mean();
}

struct AlignmentLoss {
  double total = 0.0;
  double symmetry = 0.0;
  double restoration = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();  // d total / d alpha, pixel units
};

namespace detail {
template <typename Scalar>
AlignmentLoss alignment_loss(const Image<Scalar>& slice, const RigidParams& alpha, bool with_grad);
}

/// Symmetry term mean|hflip(f(A)) - f(A)| plus restoration term
/// mean|f^-1(f(A)) - A|, weighted 1:1.
template <typename Derived>
AlignmentLoss alignment_loss(const Eigen::MatrixBase<Derived>& slice, const RigidParams& alpha,
                             bool with_grad = false) {
  return detail::alignment_loss<typename Derived::Scalar>(slice.derived(), alpha, with_grad);
}

/// Bilinear resize with corner pixels aligned, so normalized coordinates
/// are preserved.
template <typename Derived>
Image<typename Derived::Scalar> resize_bilinear(const Eigen::MatrixBase<Derived>& image, Index height, Index width) {
  return detail::resize_bilinear<typename Derived::Scalar>(image.derived(), height, width);
}

}  // namespace sean
