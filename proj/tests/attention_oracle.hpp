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
#include <vector>

#include "sean/attention.hpp"

namespace sean::testing {

// 1x1 projection of pixel (n, :, t, y, x) through `conv`, channel `o`.
inline double project(nn::Conv3d<double>& conv, const Tensor<double>& x, Index n, Index o, Index t, Index y, Index xx) {
  const Index in = x.c();
  double s = conv.bias().size() > 0 ? conv.bias().value[o] : 0.0;
  for (Index i = 0; i < in; ++i) s += conv.weight().value[o * in + i] * x(n, i, t, y, xx);
  return s;
}

// Pixel-by-pixel evaluation of the attention output, written from the
// definition: per block, per neighbour slice, a softmax over the key pixels
// of that block, with mirrored keys/values read from the flipped stack.
inline Tensor<double> naive_attention(SymmetryAttention<double>& attn, const Tensor<double>& bridge) {
  const auto& cfg = attn.config();
  const Index N = bridge.n(), C = bridge.c(), H = bridge.h(), W = bridge.w(), centre = bridge.d() / 2;
  const Index bh = H / cfg.partition.P, bw = W / cfg.partition.Q, c2 = C / 2, d = cfg.reduced;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Tensor<double> flipped(bridge.shape());
  for (Index n = 0; n < N; ++n)
    for (Index c = 0; c < C; ++c)
      for (Index z = 0; z < bridge.d(); ++z)
        for (Index y = 0; y < H; ++y)
          for (Index x = 0; x < W; ++x) flipped(n, c, z, y, x) = bridge(n, c, z, y, W - 1 - x);
  const Index branches = cfg.symmetry ? 2 : 1;
  Tensor<double> mixed(N, branches * c2, 1, H, W);
  for (Index n = 0; n < N; ++n)
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x) {
        const Index y0 = (y / bh) * bh, x0 = (x / bw) * bw;
        for (Index b = 0; b < branches; ++b) {
          const Tensor<double>& src = b == 0 ? bridge : flipped;
          auto& value_conv = b == 0 ? attn.g() : attn.h();
          for (Index t = centre - cfg.radius; t <= centre + cfg.radius; ++t) {
            std::vector<double> logits;
            for (Index ky = y0; ky < y0 + bh; ++ky)
              for (Index kx = x0; kx < x0 + bw; ++kx) {
                double dot = 0.0;
                for (Index e = 0; e < d; ++e)
                  dot += project(attn.theta(), bridge, n, e, centre, y, x) * project(attn.phi(), src, n, e, t, ky, kx);
                logits.push_back(dot * scale);
              }
            double total = 0.0;
            for (double l : logits) total += std::exp(l);
            std::size_t m = 0;
            for (Index ky = y0; ky < y0 + bh; ++ky)
              for (Index kx = x0; kx < x0 + bw; ++kx, ++m) {
                const double w = std::exp(logits[m]) / total;
                for (Index o = 0; o < c2; ++o) mixed(n, b * c2 + o, 0, y, x) += w * project(value_conv, src, n, o, t, ky, kx);
              }
          }
        }
      }
  Tensor<double> out(N, C, 1, H, W);
  for (Index n = 0; n < N; ++n)
    for (Index o = 0; o < C; ++o)
      for (Index y = 0; y < H; ++y)
        for (Index x = 0; x < W; ++x)
          out(n, o, 0, y, x) = bridge(n, o, centre, y, x) + project(attn.out(), mixed, n, o, 0, y, x);
  return out;
}

}  // namespace sean::testing
