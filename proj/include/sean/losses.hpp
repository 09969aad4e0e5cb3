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

namespace sean {

inline constexpr double kGdlEpsilon = 1e-5;

/// Two-class (foreground/background) generalized Dice loss with class
/// weights 1 / (sum g + eps)^2. All pixels of `prob` form one pool, so a
/// batch is scored as a whole. When `d_prob` is non-null it receives
/// d loss / d prob.
template <typename Scalar>
double generalized_dice_loss(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& prob,
                             const Eigen::Array<Scalar, Eigen::Dynamic, 1>& target,
                             Eigen::Array<Scalar, Eigen::Dynamic, 1>* d_prob = nullptr);

/// Mean binary cross-entropy from logits, in the overflow-free form
/// max(z, 0) - z g + log(1 + exp(-|z|)).
template <typename Scalar>
double bce_with_logits(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& logits,
                       const Eigen::Array<Scalar, Eigen::Dynamic, 1>& target,
                       Eigen::Array<Scalar, Eigen::Dynamic, 1>* d_logits = nullptr);

template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> sigmoid(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& z) {
  // Split by sign so neither branch overflows.
  return (z >= Scalar(0))
      .select(Scalar(1) / (Scalar(1) + (-z).exp()), z.exp() / (Scalar(1) + z.exp()));
}

struct LossTerms {
  double total = 0.0;
  double dice = 0.0;  // generalized Dice term (unweighted)
  double ce = 0.0;    // cross-entropy term (unweighted)
};

/// w_dice * GDL(sigmoid(logits), target) + w_ce * BCE(logits, target).
/// `d_logits`, when non-null, receives the gradient of the total.
template <typename Scalar>
LossTerms combined_loss(const Tensor<Scalar>& logits, const Tensor<Scalar>& target, double w_dice, double w_ce,
                        Tensor<Scalar>* d_logits = nullptr);

}  // namespace sean
