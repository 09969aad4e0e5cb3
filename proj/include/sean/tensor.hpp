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

#include <string>

#include "sean/error.hpp"

namespace sean {

using Index = Eigen::Index;

/// Row-major matrix; used for 2D images (rows = y, cols = x) and for
/// channel-by-position feature matrices.
template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Image = RowMatrix<Scalar>;

using ImageF = Image<float>;
using ImageD = Image<double>;

struct Shape5 {
  Index n = 0, c = 0, d = 0, h = 0, w = 0;

  Index spatial() const { return d * h * w; }
  Index per_sample() const { return c * d * h * w; }
  Index size() const { return n * c * d * h * w; }

  friend bool operator==(const Shape5&, const Shape5&) = default;
};

inline std::string to_string(const Shape5& s) {
  return "[" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.d) + "," +
         std::to_string(s.h) + "," + std::to_string(s.w) + "]";
}

/// Dense activation tensor laid out N x C x D x H x W (W fastest).
/// 2D feature maps use D = 1.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<RowMatrix<Scalar>>;
  using ConstMatrixMap = Eigen::Map<const RowMatrix<Scalar>>;

  Tensor() = default;
  explicit Tensor(const Shape5& shape) : shape_(shape), values_(Array::Zero(shape.size())) {
    require(shape.n >= 0 && shape.c >= 0 && shape.d >= 0 && shape.h >= 0 && shape.w >= 0,
            "negative tensor dimension");
  }
  Tensor(Index n, Index c, Index d, Index h, Index w) : Tensor(Shape5{n, c, d, h, w}) {}

  const Shape5& shape() const { return shape_; }
  Index n() const { return shape_.n; }
  Index c() const { return shape_.c; }
  Index d() const { return shape_.d; }
  Index h() const { return shape_.h; }
  Index w() const { return shape_.w; }
  Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }

  Scalar* data() { return values_.data(); }
  const Scalar* data() const { return values_.data(); }
  Array& array() { return values_; }
  const Array& array() const { return values_; }

  Index offset(Index n, Index c, Index d, Index h, Index w) const {
    return (((n * shape_.c + c) * shape_.d + d) * shape_.h + h) * shape_.w + w;
  }
  Scalar& operator()(Index n, Index c, Index d, Index h, Index w) { return values_[offset(n, c, d, h, w)]; }
  Scalar operator()(Index n, Index c, Index d, Index h, Index w) const { return values_[offset(n, c, d, h, w)]; }

  /// C x (D*H*W) view of one sample.
  MatrixMap sample(Index n) { return MatrixMap(data() + n * shape_.per_sample(), shape_.c, shape_.spatial()); }
  ConstMatrixMap sample(Index n) const {
    return ConstMatrixMap(data() + n * shape_.per_sample(), shape_.c, shape_.spatial());
  }

  /// H x W view of one plane.
  MatrixMap plane(Index n, Index c, Index d) { return MatrixMap(data() + offset(n, c, d, 0, 0), shape_.h, shape_.w); }
  ConstMatrixMap plane(Index n, Index c, Index d) const {
    return ConstMatrixMap(data() + offset(n, c, d, 0, 0), shape_.h, shape_.w);
  }

  void set_zero() { values_.setZero(); }
  bool all_finite() const { return values_.isFinite().all(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    out.array() = values_.template cast<Other>();
    return out;
  }

 private:
  Shape5 shape_;
  Array values_;
};

template <typename Scalar>
void require_shape(const Tensor<Scalar>& t, const Shape5& expected, const char* what) {
  if (!(t.shape() == expected))
    fail(ErrorKind::InvalidArgument,
         std::string(what) + ": expected shape " + to_string(expected) + ", got " + to_string(t.shape()));
}

}  // namespace sean
