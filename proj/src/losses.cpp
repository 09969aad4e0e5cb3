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

#include "sean/losses.hpp"

#include <cmath>

namespace sean {

namespace {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

}  // namespace

template <typename Scalar>
double generalized_dice_loss(const ArrayX<Scalar>& prob, const ArrayX<Scalar>& target, ArrayX<Scalar>* d_prob) {
  require(prob.size() == target.size() && prob.size() > 0, "generalized_dice_loss: size mismatch");
  const ArrayX<double> p = prob.template cast<double>();
  const ArrayX<double> g = target.template cast<double>();
  const double w1 = 1.0 / std::pow(g.sum() + kGdlEpsilon, 2);
  const double w0 = 1.0 / std::pow((1.0 - g).sum() + kGdlEpsilon, 2);
  const double num = w1 * (p * g).sum() + w0 * ((1.0 - p) * (1.0 - g)).sum();
  const double den = w1 * (p + g).sum() + w0 * ((1.0 - p) + (1.0 - g)).sum();
  if (d_prob != nullptr) {
    const ArrayX<double> d_num = w1 * g - w0 * (1.0 - g);
    const double d_den = w1 - w0;
    *d_prob = (-2.0 * (d_num * den - num * d_den) / (den * den)).template cast<Scalar>();
  }
  return 1.0 - 2.0 * num / den;
}

template <typename Scalar>
double bce_with_logits(const ArrayX<Scalar>& logits, const ArrayX<Scalar>& target, ArrayX<Scalar>* d_logits) {
  require(logits.size() == target.size() && logits.size() > 0, "bce_with_logits: size mismatch");
  const ArrayX<double> z = logits.template cast<double>();
  const ArrayX<double> g = target.template cast<double>();
  const double m = static_cast<double>(z.size());
  if (d_logits != nullptr) *d_logits = ((sigmoid<double>(z) - g) / m).template cast<Scalar>();
  return (z.max(0.0) - z * g + (1.0 + (-z.abs()).exp()).log()).sum() / m;
}

template <typename Scalar>
LossTerms combined_loss(const Tensor<Scalar>& logits, const Tensor<Scalar>& target, double w_dice, double w_ce,
                        Tensor<Scalar>* d_logits) {
  require_shape(target, logits.shape(), "combined_loss target");
  const ArrayX<double> z = logits.array().template cast<double>();
  const ArrayX<double> g = target.array().template cast<double>();
  const ArrayX<double> p = sigmoid<double>(z);
  ArrayX<double> d_p, d_z;
  LossTerms out;
  out.dice = generalized_dice_loss<double>(p, g, d_logits != nullptr ? &d_p : nullptr);
  out.ce = bce_with_logits<double>(z, g, d_logits != nullptr ? &d_z : nullptr);
  out.total = w_dice * out.dice + w_ce * out.ce;
  if (d_logits != nullptr) {
    *d_logits = Tensor<Scalar>(logits.shape());
    d_logits->array() = (w_dice * d_p * p * (1.0 - p) + w_ce * d_z).template cast<Scalar>();
  }
  return out;
}

#define SEAN_INSTANTIATE(S)                                                                              \
  template double generalized_dice_loss<S>(const ArrayX<S>&, const ArrayX<S>&, ArrayX<S>*);              \
  template double bce_with_logits<S>(const ArrayX<S>&, const ArrayX<S>&, ArrayX<S>*);                    \
  template LossTerms combined_loss<S>(const Tensor<S>&, const Tensor<S>&, double, double, Tensor<S>*);
SEAN_INSTANTIATE(float)
SEAN_INSTANTIATE(double)
#undef SEAN_INSTANTIATE

}  // namespace sean
