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

#include <numbers>
#include <random>

#include "doctest.h"
#include "sean/phantom.hpp"
#include "sean/rigid.hpp"

using namespace sean;

namespace {

constexpr double kPi = std::numbers::pi;

RigidParams random_params(std::mt19937_64& rng, double max_theta, double max_shift) {
  std::uniform_real_distribution<double> th(-max_theta, max_theta), sh(-max_shift, max_shift);
  return {th(rng), sh(rng), sh(rng)};
}

Eigen::Matrix3d homogeneous(const Eigen::Matrix<double, 2, 3>& m) {
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  h.topRows<2>() = m;
  return h;
}

ImageD random_image(Index h, Index w, std::mt19937_64& rng) {
  ImageD img(h, w);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  for (Index i = 0; i < img.size(); ++i) img.data()[i] = d(rng);
  return img;
}

}  // namespace

TEST_CASE("rigid matrix") {
  CHECK(rigid_matrix({}, 32, 32).isApprox((Eigen::Matrix<double, 2, 3>() << 1, 0, 0, 0, 1, 0).finished()));
  const auto quarter = rigid_matrix({kPi / 2, 0, 0}, 32, 32);
  CHECK(std::abs(quarter(0, 0)) < 1e-12);
  CHECK(quarter(0, 1) == doctest::Approx(-1.0));
  CHECK(quarter(1, 0) == doctest::Approx(1.0));
  CHECK(std::abs(quarter(1, 1)) < 1e-12);
  CHECK(quarter.col(2).isZero());

  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const RigidParams a = random_params(rng, kPi, 20.0);
    const Eigen::Matrix3d composed =
        homogeneous(rigid_matrix(invert_params(a), 48, 40)) * homogeneous(rigid_matrix(a, 48, 40));
    CHECK((composed - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("apply_rigid on known fields") {
  std::mt19937_64 rng(2);
  const ImageD img = random_image(20, 24, rng);
  CHECK((apply_rigid(img, {}).array() == img.array()).all());

  const ImageD twice = apply_rigid(apply_rigid(img, {kPi, 0, 0}), {kPi, 0, 0});
  CHECK((twice - img).block(2, 2, 16, 20).cwiseAbs().maxCoeff() < 1e-4);

  ImageD ramp(16, 16);
  for (Index y = 0; y < 16; ++y)
    for (Index x = 0; x < 16; ++x) ramp(y, x) = static_cast<double>(x);
  const ImageD shifted = apply_rigid(ramp, {0, 2, 0});
  for (Index y = 0; y < 16; ++y)
    for (Index x = 2; x < 16; ++x) CHECK(shifted(y, x) == doctest::Approx(x - 2.0).epsilon(1e-4));
}

TEST_CASE("inverse parameters undo the warp") {
  CHECK(invert_params({}) == RigidParams{0, 0, 0});
  const RigidParams r = invert_params({0.4, 0, 0});
  CHECK(r.theta == -0.4);
  CHECK(std::abs(r.tx) < 1e-15);
  CHECK(std::abs(r.ty) < 1e-15);

  // Bilinear interpolation reproduces affine fields, so the round trip is
  // exact wherever both warps sample inside the image.
  ImageD plane(40, 40);
  for (Index y = 0; y < 40; ++y)
    for (Index x = 0; x < 40; ++x) plane(y, x) = 0.3 * x - 0.7 * y + 5.0;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const RigidParams a = random_params(rng, 0.3, 3.0);
    const ImageD back = apply_rigid(apply_rigid(plane, a), invert_params(a));
    CHECK((back - plane).block(12, 12, 16, 16).cwiseAbs().mean() < 1e-3);
  }
}

TEST_CASE("apply_rigid_backward is the adjoint of the warp") {
  std::mt19937_64 rng(4);
  const ImageD x = random_image(12, 10, rng), y = random_image(12, 10, rng);
  const RigidParams a = random_params(rng, 0.5, 2.0);
  ImageD adj = ImageD::Zero(12, 10);
  apply_rigid_backward(x, a, y, &adj);
  CHECK(apply_rigid(x, a).cwiseProduct(y).sum() == doctest::Approx(x.cwiseProduct(adj).sum()).epsilon(1e-12));
}

TEST_CASE("alignment loss terms") {
  std::mt19937_64 rng(5);
  ImageD sym = random_image(16, 16, rng);
  sym = 0.5 * (sym + hflip(sym)).eval();
  const auto zero = alignment_loss(sym, {});
  CHECK(zero.symmetry == 0.0);
  CHECK(zero.restoration == 0.0);

  const ImageD img = random_image(16, 16, rng);
  const auto at_identity = alignment_loss(img, {});
  double oracle = 0.0;
  for (Index y = 0; y < 16; ++y)
    for (Index x = 0; x < 16; ++x) oracle += std::abs(img(y, x) - img(y, 15 - x));
  CHECK(at_identity.restoration == 0.0);
  CHECK(at_identity.symmetry == doctest::Approx(oracle / 256.0).epsilon(1e-12));
  CHECK(at_identity.total == at_identity.symmetry);
  CHECK(alignment_loss(ImageD(hflip(img)), {}).symmetry == doctest::Approx(at_identity.symmetry).epsilon(1e-14));
  CHECK((hflip(hflip(img)).array() == img.array()).all());

  PhantomSpec spec;
  spec.lesion_probability = 0.0;
  spec.rotation_range_deg = {8, 12};
  spec.shift_range_px = {3, 6};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Phantom p = generate_phantom(spec, seed);
    const ImageF slice = window_slice(p.volume.voxels.slice(spec.num_slices / 2));
    CHECK(alignment_loss(slice, invert_params(p.truth.true_params)).symmetry <
          alignment_loss(slice, RigidParams{}).symmetry);
  }
}

TEST_CASE("alignment loss gradient matches central differences") {
  // The loss is piecewise smooth (bilinear cells, absolute values). A
  // parameter draw is used only where differences with steps h and h/2
  // agree, i.e. no kink lies within the stencil; there the one-sided
  // analytic derivative and the central difference describe the same slope.
  std::mt19937_64 rng(6);
  const double h = 1e-4;
  int accepted = 0;
  for (int attempt = 0; attempt < 400 && accepted < 30; ++attempt) {
    const ImageD img = random_image(16, 16, rng);
    const RigidParams a = random_params(rng, 0.4, 2.0);
    const auto loss = alignment_loss(img, a, true);
    Eigen::Vector3d fd, fd_half;
    for (int k = 0; k < 3; ++k) {
      auto at = [&](double step) {
        Eigen::Vector3d v = a.vec();
        v[k] += step;
        return alignment_loss(img, RigidParams::from_vec(v)).total;
      };
      fd[k] = (at(h) - at(-h)) / (2 * h);
      fd_half[k] = (at(h / 2) - at(-h / 2)) / h;
    }
    if ((fd - fd_half).norm() > 1e-6 * std::max(1.0, fd.norm())) continue;
    ++accepted;
    CHECK((loss.grad - fd).norm() / std::max(loss.grad.norm(), fd.norm()) < 1e-3);
  }
  CHECK(accepted >= 10);
}

TEST_CASE("corner-aligned resize") {
  std::mt19937_64 rng(7);
  const ImageD img = random_image(9, 13, rng);
  const ImageD big = resize_bilinear(img, 17, 25);
  CHECK(big(0, 0) == img(0, 0));
  CHECK(big(16, 24) == doctest::Approx(img(8, 12)));
  CHECK(big(2, 4) == doctest::Approx(img(1, 2)));
  CHECK((resize_bilinear(img, 9, 13).array() == img.array()).all());
}
