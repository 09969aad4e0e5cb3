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
#include <functional>
#include <random>

#include "sean/nn/layers.hpp"
#include "sean/tensor.hpp"

namespace sean::testing {

inline Tensor<double> random_tensor(const Shape5& shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(shape);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
  return t;
}

inline Eigen::ArrayXd random_array(Index n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Eigen::ArrayXd a(n);
  std::uniform_real_distribution<double> dist(lo, hi);
  for (Index i = 0; i < n; ++i) a[i] = dist(rng);
  return a;
}

/// ||a - n|| / max(||a||, ||n||), zero when both vanish.
inline double relative_error(const Eigen::ArrayXd& analytic, const Eigen::ArrayXd& numeric) {
  const double scale = std::max(analytic.matrix().norm(), numeric.matrix().norm());
  if (scale == 0.0) return 0.0;
  return (analytic - numeric).matrix().norm() / scale;
}

/// Central differences of `loss` with respect to every entry of `x`.
inline Eigen::ArrayXd numeric_gradient(double* x, Index n, const std::function<double()>& loss, double h = 1e-4) {
  Eigen::ArrayXd g(n);
  for (Index i = 0; i < n; ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = loss();
    x[i] = saved - h;
    const double down = loss();
    x[i] = saved;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Scalar probe loss sum(r * y) for a fixed random weighting r.
inline double probe(const Tensor<double>& y, const Tensor<double>& r) { return (y.array() * r.array()).sum(); }

}  // namespace sean::testing
