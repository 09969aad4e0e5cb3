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

#include "sean/tensor.hpp"

namespace sean::nn {

template <typename Scalar>
Tensor<Scalar> concat_channels(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require(a.n() == b.n() && a.d() == b.d() && a.h() == b.h() && a.w() == b.w(),
          "concat_channels: shapes " + to_string(a.shape()) + " and " + to_string(b.shape()) + " disagree");
  Tensor<Scalar> out(a.n(), a.c() + b.c(), a.d(), a.h(), a.w());
  for (Index n = 0; n < a.n(); ++n) {
    out.sample(n).topRows(a.c()) = a.sample(n);
    out.sample(n).bottomRows(b.c()) = b.sample(n);
  }
  return out;
}

/// Channels [first, first + count) of every sample.
template <typename Scalar>
Tensor<Scalar> slice_channels(const Tensor<Scalar>& x, Index first, Index count) {
  require(first >= 0 && count >= 0 && first + count <= x.c(), "slice_channels: out of range");
  Tensor<Scalar> out(x.n(), count, x.d(), x.h(), x.w());
  for (Index n = 0; n < x.n(); ++n) out.sample(n) = x.sample(n).middleRows(first, count);
  return out;
}

template <typename Scalar>
Tensor<Scalar> concat_batch(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require(a.c() == b.c() && a.d() == b.d() && a.h() == b.h() && a.w() == b.w(), "concat_batch: shape mismatch");
  Tensor<Scalar> out(a.n() + b.n(), a.c(), a.d(), a.h(), a.w());
  out.array().head(a.size()) = a.array();
  out.array().tail(b.size()) = b.array();
  return out;
}

template <typename Scalar>
Tensor<Scalar> slice_batch(const Tensor<Scalar>& x, Index first, Index count) {
  require(first >= 0 && count >= 0 && first + count <= x.n(), "slice_batch: out of range");
  Tensor<Scalar> out(count, x.c(), x.d(), x.h(), x.w());
  out.array() = x.array().segment(first * x.shape().per_sample(), out.size());
  return out;
}

/// N x C x 1 x H x W slice at depth index `depth`.
template <typename Scalar>
Tensor<Scalar> take_depth(const Tensor<Scalar>& x, Index depth) {
  require(depth >= 0 && depth < x.d(), "take_depth: index out of range");
  Tensor<Scalar> out(x.n(), x.c(), 1, x.h(), x.w());
  for (Index n = 0; n < x.n(); ++n)
    for (Index c = 0; c < x.c(); ++c) out.plane(n, c, 0) = x.plane(n, c, depth);
  return out;
}

/// Adjoint of take_depth: scatters a 1-deep gradient into a zero tensor of `shape`.
template <typename Scalar>
Tensor<Scalar> put_depth(const Tensor<Scalar>& g, const Shape5& shape, Index depth) {
  Tensor<Scalar> out(shape);
  for (Index n = 0; n < g.n(); ++n)
    for (Index c = 0; c < g.c(); ++c) out.plane(n, c, depth) = g.plane(n, c, 0);
  return out;
}

/// Mirror along W: out[..., x] = in[..., W-1-x].
template <typename Scalar>
Tensor<Scalar> hflip(const Tensor<Scalar>& x) {
  Tensor<Scalar> out(x.shape());
  for (Index n = 0; n < x.n(); ++n)
    for (Index c = 0; c < x.c(); ++c)
      for (Index d = 0; d < x.d(); ++d) out.plane(n, c, d) = x.plane(n, c, d).rowwise().reverse();
  return out;
}

template <typename Scalar>
Tensor<Scalar> add(const Tensor<Scalar>& a, const Tensor<Scalar>& b) {
  require(a.shape() == b.shape(), "add: shape mismatch");
  Tensor<Scalar> out(a.shape());
  out.array() = a.array() + b.array();
  return out;
}

}  // namespace sean::nn
