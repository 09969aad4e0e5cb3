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
#include <cstdint>
#include <string>

#include "sean/tensor.hpp"

namespace sean {

/// Depth x height x width scalar volume, slices stored contiguously and
/// row-major (x fastest).
template <typename T>
class Volume {
 public:
  using Array = Eigen::Array<T, Eigen::Dynamic, 1>;
  using SliceMap = Eigen::Map<Image<T>>;
  using ConstSliceMap = Eigen::Map<const Image<T>>;

  Volume() = default;
  Volume(Index depth, Index height, Index width, T fill = T(0))
      : depth_(depth), height_(height), width_(width), values_(Array::Constant(depth * height * width, fill)) {
    require(depth >= 0 && height >= 0 && width >= 0, "negative volume dimension");
  }

  Index depth() const { return depth_; }
  Index height() const { return height_; }
  Index width() const { return width_; }
  Index slice_size() const { return height_ * width_; }
  Index size() const { return values_.size(); }
  bool empty() const { return values_.size() == 0; }
  std::array<Index, 3> dims() const { return {depth_, height_, width_}; }
  bool same_dims(const Volume& o) const { return depth_ == o.depth_ && height_ == o.height_ && width_ == o.width_; }
  template <typename U>
  bool same_dims(const Volume<U>& o) const {
    return depth_ == o.depth() && height_ == o.height() && width_ == o.width();
  }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  Array& array() { return values_; }
  const Array& array() const { return values_; }

  T& operator()(Index z, Index y, Index x) { return values_[(z * height_ + y) * width_ + x]; }
  T operator()(Index z, Index y, Index x) const { return values_[(z * height_ + y) * width_ + x]; }

  SliceMap slice(Index z) { return SliceMap(data() + z * slice_size(), height_, width_); }
  ConstSliceMap slice(Index z) const { return ConstSliceMap(data() + z * slice_size(), height_, width_); }

  friend bool operator==(const Volume& a, const Volume& b) {
    return a.same_dims(b) && (a.values_ == b.values_).all();
  }

 private:
  Index depth_ = 0, height_ = 0, width_ = 0;
  Array values_;
};

using Mask = Volume<std::uint8_t>;

/// Spacing in millimetres, ordered (dz, dy, dx).
using Spacing = std::array<double, 3>;

struct CtVolume {
  std::string id;
  Volume<float> voxels;
  Spacing spacing{5.0, 1.0, 1.0};

  /// Throws InvalidArgument when dimensions, spacing or voxel values are invalid.
  void validate() const;
};

template <typename T>
Volume<T> volume_from_slice(const Image<T>& slice) {
  Volume<T> v(1, slice.rows(), slice.cols());
  v.slice(0) = slice;
  return v;
}

}  // namespace sean
