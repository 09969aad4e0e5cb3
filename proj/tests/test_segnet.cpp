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

#include <random>

#include "doctest.h"
#include "sean/segnet.hpp"
#include "testing.hpp"

using namespace sean;
using sean::testing::probe;
using sean::testing::random_tensor;
using sean::testing::relative_error;

namespace {

SegConfig small_config(FusionMode mode, Index base = 2) {
  SegConfig cfg;
  cfg.base_width = base;
  cfg.fusion = mode;
  return cfg;
}

// Trainable scalar count written out per layer.
Index expected_count(const SegConfig& cfg) {
  const Index b = cfg.base_width, c = cfg.bridge_channels();
  auto conv = [](Index k, Index in, Index out) { return k * in * out + out; };
  Index n = 0, in = cfg.input_channels();
  for (Index k = 0; k < 5; ++k) {
    const Index out = b << k;
    n += conv(27, in, out) + conv(27, out, out) + 4 * out;
    in = out;
  }
  for (Index i = 0; i < 4; ++i) {
    const Index skip = b << (3 - i);
    n += conv(9, in + skip, skip) + conv(9, skip, skip) + 4 * skip;
    in = skip;
  }
  n += conv(1, b, 1);
  const Index d = std::max<Index>(1, std::lround(c * cfg.d_ratio)), half = c / 2;
  switch (cfg.fusion) {
    case FusionMode::FeatureL1:
    case FusionMode::FeatureConcat:
      n += conv(1, 2 * c, c);
      break;
    case FusionMode::Sea:
      n += 2 * conv(1, c, d) + 2 * conv(1, c, half) + conv(1, 2 * half, c);
      break;
    case FusionMode::SeaSelfOnly:
      n += 2 * conv(1, c, d) + conv(1, c, half) + conv(1, half, c);
      break;
    default:
      break;
  }
  return n;
}

Tensor<double> symmetric_slab(std::mt19937_64& rng, Index n, Index d, Index size) {
  auto x = random_tensor({n, 1, d, size, size}, rng);
  const auto f = nn::hflip(x);
  x.array() = 0.5 * (x.array() + f.array());
  return x;
}

}  // namespace

TEST_CASE("fusion names") {
  for (auto mode : {FusionMode::None, FusionMode::ImageL1, FusionMode::FeatureL1, FusionMode::FeatureConcat,
                    FusionMode::Sea, FusionMode::SeaSelfOnly})
    CHECK(parse_fusion(to_string(mode)) == mode);
  CHECK(std::string(to_string(FusionMode::FeatureConcat)) == "ft-cc");
  CHECK_THROWS_AS(parse_fusion("unet"), Error);
}

TEST_CASE("encoder and model shapes") {
  std::mt19937_64 rng(1);
  SegConfig cfg = small_config(FusionMode::None, 16);
  SegModel<float> model(cfg, 0);
  const auto slab = random_tensor({1, 1, 3, 64, 64}, rng).cast<float>();
  const auto enc = model.encode(slab);
  CHECK(enc.bridge.shape() == Shape5{1, 256, 3, 4, 4});
  REQUIRE(enc.skips.size() == 4);
  for (Index k = 0; k < 4; ++k) CHECK(enc.skips[k].shape() == Shape5{1, 16 << k, 1, 64 >> k, 64 >> k});
  CHECK((model.fuse(enc).array() == nn::take_depth(enc.bridge, 1).array()).all());

  SegConfig flat = small_config(FusionMode::None);
  flat.radius = 0;
  flat.attention_radius = 0;
  SegModel<float> flat_model(flat, 0);
  CHECK(flat_model.encode(random_tensor({2, 1, 1, 32, 32}, rng).cast<float>()).bridge.d() == 1);

  for (auto mode : {FusionMode::None, FusionMode::ImageL1, FusionMode::FeatureL1, FusionMode::FeatureConcat,
                    FusionMode::Sea, FusionMode::SeaSelfOnly}) {
    INFO(std::string(to_string(mode)));
    SegModel<float> m(small_config(mode), 3);
    const auto logits = m.forward(random_tensor({2, 1, 3, 32, 64}, rng).cast<float>());
    CHECK(logits.shape() == Shape5{2, 1, 1, 32, 64});
    CHECK(logits.all_finite());
  }
}

TEST_CASE("input validation") {
  std::mt19937_64 rng(2);
  SegModel<float> m(small_config(FusionMode::Sea), 0);
  CHECK_THROWS_AS(m.forward(random_tensor({1, 1, 5, 32, 32}, rng).cast<float>()), Error);
  CHECK_THROWS_AS(m.forward(random_tensor({1, 1, 3, 40, 32}, rng).cast<float>()), Error);
  CHECK_THROWS_AS(m.forward(random_tensor({1, 2, 3, 32, 32}, rng).cast<float>()), Error);
  SegConfig bad = small_config(FusionMode::Sea);
  bad.attention_radius = 2;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("parameter count has a closed form") {
  for (auto mode : {FusionMode::None, FusionMode::ImageL1, FusionMode::FeatureL1, FusionMode::FeatureConcat,
                    FusionMode::Sea, FusionMode::SeaSelfOnly})
    for (Index base : {2, 8, 16}) {
      INFO(std::string(to_string(mode)), " base ", base);
      SegConfig cfg = small_config(mode, base);
      SegModel<float> m(cfg, 0);
      CHECK(m.parameter_count() == expected_count(cfg));
    }
  SegModel<float> none(small_config(FusionMode::None, 16), 0);
  CHECK(none.parameter_count() == 4320257);
}

TEST_CASE("sea at initialization reproduces the plain model bit for bit") {
  std::mt19937_64 rng(3);
  SegModel<float> sea(small_config(FusionMode::Sea, 4), 7);
  SegModel<float> none(small_config(FusionMode::None, 4), 99);
  CHECK(transplant_parameters(sea, none) == static_cast<Index>(none.parameters().size()));
  sea.set_training(false);
  none.set_training(false);
  for (int i = 0; i < 10; ++i) {
    const auto slab = random_tensor({2, 1, 3, 32, 32}, rng).cast<float>();
    CHECK((sea.forward(slab).array() == none.forward(slab).array()).all());
  }
}

TEST_CASE("feature-level fusions on symmetric input") {
  std::mt19937_64 rng(4);
  SUBCASE("ft-l1 difference channels vanish on a symmetric bridge") {
    SegModel<double> m(small_config(FusionMode::FeatureL1), 0);
    EncoderOutput<double> enc;
    auto bridge = random_tensor({1, 32, 3, 4, 4}, rng);
    const auto f = nn::hflip(bridge);
    bridge.array() = bridge.array() + f.array();
    enc.bridge = bridge;
    const auto centre = nn::take_depth(bridge, 1);
    const auto fused = m.fuse(enc);
    nn::Parameter<double>* w = nullptr;
    nn::Parameter<double>* b = nullptr;
    for (auto* p : m.parameters()) {
      if (p->name == "fuse.weight") w = p;
      if (p->name == "fuse.bias") b = p;
    }
    REQUIRE(w != nullptr);
    for (Index o = 0; o < 32; ++o)
      for (Index y = 0; y < 4; ++y)
        for (Index x = 0; x < 4; ++x) {
          double s = b->value[o];
          for (Index i = 0; i < 32; ++i) s += w->value[o * 64 + i] * centre(0, i, 0, y, x);
          CHECK(fused(0, o, 0, y, x) == doctest::Approx(s).epsilon(1e-12));
        }
  }
  SUBCASE("ft-cc halves swap under a flipped slab and coincide for a symmetric one") {
    SegModel<double> m(small_config(FusionMode::FeatureConcat), 0);
    m.set_training(false);
    const auto x = random_tensor({2, 1, 3, 64, 64}, rng);
    const auto a = m.encode(x);
    const auto b = m.encode(nn::hflip(x));
    CHECK((a.bridge.array() == b.flipped_bridge.array()).all());
    CHECK((a.flipped_bridge.array() == b.bridge.array()).all());
    const auto s = m.encode(symmetric_slab(rng, 1, 3, 64));
    CHECK((s.bridge.array() == s.flipped_bridge.array()).all());
    EncoderOutput<double> missing;
    missing.bridge = s.bridge;
    CHECK_THROWS_AS(m.fuse(missing), Error);
  }
}

TEST_CASE("model gradients match finite differences") {
  for (auto mode : {FusionMode::None, FusionMode::ImageL1, FusionMode::FeatureL1, FusionMode::FeatureConcat,
                    FusionMode::Sea, FusionMode::SeaSelfOnly}) {
    INFO(std::string(to_string(mode)));
    std::mt19937_64 rng(5);
    SegConfig cfg = small_config(mode, 2);
    SegModel<double> m(cfg, 11);
    if (cfg.uses_attention())
      m.attention().out().weight().value = sean::testing::random_array(m.attention().out().weight().size(), rng);
    auto x = random_tensor({2, 1, 3, 32, 32}, rng);
    const auto r = random_tensor({2, 1, 1, 32, 32}, rng);
    auto loss = [&] { return probe(m.forward(x), r); };
    auto params = m.parameters();
    m.forward(x);
    nn::zero_grads(params);
    m.backward(r);
    // A sample of scalars from every trainable tensor. A sample is skipped
    // when steps h and h/2 disagree, i.e. a ReLU or max-pool kink lies
    // inside the stencil.
    int accepted = 0, skipped = 0;
    for (auto* p : params) {
      if (!p->trainable) continue;
      for (Index i = 0; i < p->size(); i += std::max<Index>(1, p->size() / 6)) {
        auto fd = [&](double h) {
          const double saved = p->value[i];
          p->value[i] = saved + h;
          const double up = loss();
          p->value[i] = saved - h;
          const double down = loss();
          p->value[i] = saved;
          return (up - down) / (2 * h);
        };
        const double n1 = fd(1e-6), n2 = fd(5e-7);
        if (std::abs(n1 - n2) > 1e-6 * std::max(1.0, std::abs(n1))) {
          ++skipped;
          continue;
        }
        ++accepted;
        INFO(p->name, "[", i, "]");
        CHECK(std::abs(p->grad[i] - n1) <= 1e-5 * std::max(1.0, std::abs(n1)));
      }
    }
    CHECK(skipped * 20 <= accepted);
  }
}
