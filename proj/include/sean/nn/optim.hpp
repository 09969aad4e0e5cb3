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

#include "sean/nn/layers.hpp"

namespace sean::nn {

/// Polynomial decay: base_lr * (1 - iter / total_iter)^power.
inline double poly_lr(double base_lr, long iter, long total_iter, double power) {
  require(total_iter > 0, "poly_lr: total_iter must be positive");
  require(iter >= 0 && iter <= total_iter, "poly_lr: iter outside [0, total_iter]");
  return base_lr * std::pow(1.0 - static_cast<double>(iter) / static_cast<double>(total_iter), power);
}

/// Adam with bias correction. Non-trainable parameters (batch-norm
/// running statistics) are skipped.
template <typename Scalar>
class Adam {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Adam(ParamRefs<Scalar> params, double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto* p : params)
      if (p->trainable) params_.push_back(p);
    for (auto* p : params_) {
      m_.push_back(Array::Zero(p->size()));
      v_.push_back(Array::Zero(p->size()));
    }
  }

  long steps() const { return t_; }

  void zero_grad() { zero_grads(params_); }

  void step(double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    const auto b1 = static_cast<Scalar>(beta1_), b2 = static_cast<Scalar>(beta2_);
    const auto step_size = static_cast<Scalar>(lr / c1);
    const auto inv_c2 = static_cast<Scalar>(1.0 / c2);
    const auto eps = static_cast<Scalar>(eps_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& g = params_[i]->grad;
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.square();
      params_[i]->value -= step_size * m_[i] / ((v_[i] * inv_c2).sqrt() + eps);
    }
  }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  ParamRefs<Scalar> params_;
  std::vector<Array> m_, v_;
};

}  // namespace sean::nn
