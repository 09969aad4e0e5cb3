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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails. Criteria can be selected by number:
//   acceptance 3 5 9

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "attention_oracle.hpp"
#include "loss_oracle.hpp"
#include "metrics_oracle.hpp"
#include "sean/align_net.hpp"
#include "sean/evaluate.hpp"
#include "sean/metrics.hpp"
#include "sean/nn/optim.hpp"
#include "sean/segnet.hpp"
#include "sean/train.hpp"
#include "testing.hpp"

using namespace sean;
using sean::testing::random_tensor;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Tally of named sub-checks; the detail lists the failing ones.
struct Checks {
  int total = 0;
  std::vector<std::string> failed;

  void operator()(bool ok, const std::string& what) {
    ++total;
    if (!ok) failed.push_back(what);
  }
  Result result(const std::string& summary) const {
    std::string d = summary + fmt(" (%d/%d checks)", total - static_cast<int>(failed.size()), total);
    for (std::size_t i = 0; i < failed.size() && i < 5; ++i) d += "; failed: " + failed[i];
    return {failed.empty(), d};
  }
};

// ---------------------------------------------------------------- 1 and 2

PhantomSpec alignment_spec() {
  PhantomSpec spec;
  spec.height = spec.width = 128;
  spec.num_slices = 8;
  spec.rotation_range_deg = {-15, 15};
  spec.shift_range_px = {-20, 20};
  spec.vshift_range_px = {-8, 8};
  return spec;
}

std::optional<AlignmentNet<float>> trained_aligner;

Result alignment_accuracy() {
  const PhantomSpec spec = alignment_spec();
  std::vector<CtVolume> train;
  for (std::uint64_t i = 0; i < 200; ++i) train.push_back(generate_phantom(spec, mix_seed(100, i)).volume);
  AlignTrainConfig cfg;
  cfg.epochs = 40;
  cfg.batch_size = 8;
  cfg.base_lr = 3e-5;
  cfg.input_size = 128;
  const auto t0 = std::chrono::steady_clock::now();
  auto trained = train_alignment(train, cfg);
  const double train_s = elapsed(t0);

  const auto t1 = std::chrono::steady_clock::now();
  double theta = 0.0, tx = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const Phantom p = generate_phantom(spec, mix_seed(200, i));
    const auto err = alignment_error(estimate_volume_params(trained.net, p.volume), invert_params(p.truth.true_params));
    theta += err.theta_deg;
    tx += err.tx_px;
  }
  theta /= 50.0;
  tx /= 50.0;
  const double eval_s = elapsed(t1);
  trained_aligner = std::move(trained.net);
  return {theta <= 3.0 && tx <= 5.0,
          fmt("mean |dtheta| %.2f deg (<= 3), mean |dtx| %.2f px (<= 5); train %.0f s, eval %.1f s, loss %.4f -> %.4f",
              theta, tx, train_s, eval_s, trained.curve.front().loss, trained.curve.back().loss)};
}

Result alignment_speed() {
  PhantomSpec spec = alignment_spec();
  spec.num_slices = 16;
  AlignmentNet<float> fresh(128, 0);
  AlignmentNet<float>& net = trained_aligner ? *trained_aligner : fresh;
  SegConfig seg;
  seg.base_width = 2;
  SegModel<float> model(seg, 0);
  std::vector<EvalCase> cases;
  for (std::uint64_t i = 0; i < 20; ++i) {
    Phantom p = generate_phantom(spec, mix_seed(400, i));
    p.volume.id = "bench_" + std::to_string(i);
    cases.push_back({p.volume, p.truth.lesion_mask, p.truth.true_params});
  }
  const MetricsReport rep = evaluate_dataset(model, &net, cases, EvalConfig{});
  return {rep.mean_align_seconds < 1.0,
          fmt("alignment %.3f s per 16-slice 128x128 volume (mean of 20, max %.3f; bound 1 s)", rep.mean_align_seconds,
              rep.max_align_seconds)};
}

// ---------------------------------------------------------------------- 3

SymmetryAttention<double> random_attention(Index c, Index radius, PartitionSpec part, bool symmetry,
                                           std::mt19937_64& rng) {
  SymmetryAttention<double> attn("attn", AttentionConfig::make(c, 0.5, radius, part, symmetry), rng());
  attn.out().weight().value = sean::testing::random_array(attn.out().weight().size(), rng, -0.5, 0.5);
  attn.out().bias().value = sean::testing::random_array(attn.out().bias().size(), rng, -0.5, 0.5);
  return attn;
}

Result attention_suite() {
  Checks check;
  std::mt19937_64 rng(3);
  double worst_row = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Index d = 1 + static_cast<Index>(rng() % 8), n = 1 + static_cast<Index>(rng() % 64);
    const RowMatrix<float> q = RowMatrix<float>::Random(d, n) * 3.0f, k = RowMatrix<float>::Random(d, n) * 3.0f;
    const auto s = attention_similarity(q, k);
    worst_row = std::max(worst_row, static_cast<double>((s.rowwise().sum().array() - 1.0f).abs().maxCoeff()));
  }
  check(worst_row < 1e-5, fmt("(a) row sum error %.2g", worst_row));

  for (Index P : {1, 2, 4})
    for (Index Q : {1, 2, 4})
      for (Index T : {0, 1, 2}) {
        auto attn = random_attention(8, T, {P, Q}, true, rng);
        const auto x = random_tensor({1, 8, 2 * T + 1, 8, 8}, rng);
        check(attn.forward(x).shape() == Shape5{1, 8, 1, 8, 8}, fmt("(b) shape P=%ld Q=%ld T=%ld", P, Q, T));
      }

  for (bool symmetry : {true, false}) {
    SymmetryAttention<float> attn("attn", AttentionConfig::make(8, 0.5, 1, {2, 2}, symmetry), 5);
    const auto x = random_tensor({2, 8, 3, 8, 8}, rng).cast<float>();
    check((attn.forward(x).array() == nn::take_depth(x, 1).array()).all(), "(c) residual identity");
  }

  double worst_flip = 0.0;
  for (int i = 0; i < 20; ++i) {
    const PartitionSpec part{1 + static_cast<Index>(i % 2), i % 3 == 0 ? 1 : 2};
    auto attn = random_attention(4, i % 2, part, i % 5 != 0, rng);
    const auto x = random_tensor({1, 4, 2 * (i % 2) + 1, 4, 4}, rng);
    const auto a = nn::hflip(attn.forward(x));
    const auto b = attn.forward(nn::hflip(x));
    worst_flip = std::max(worst_flip, (a.array() - b.array()).abs().maxCoeff());
  }
  check(worst_flip < 1e-4, fmt("(d) flip error %.2g", worst_flip));

  auto self = random_attention(4, 0, {1, 1}, false, rng);
  const auto x = random_tensor({2, 4, 1, 4, 4}, rng);
  const double oracle_err =
      (self.forward(x).array() - sean::testing::naive_attention(self, x).array()).abs().maxCoeff();
  check(oracle_err < 1e-5, fmt("(e) oracle error %.2g", oracle_err));
  return check.result(fmt("row-sum err %.1e, flip err %.1e, oracle err %.1e", worst_row, worst_flip, oracle_err));
}

// ---------------------------------------------------------------------- 4

double central(double* v, const std::function<double()>& f, double h) {
  const double saved = *v;
  *v = saved + h;
  const double up = f();
  *v = saved - h;
  const double down = f();
  *v = saved;
  return (up - down) / (2 * h);
}

Result gradient_checks() {
  Checks check;
  std::mt19937_64 rng(4);
  const double h = 1e-4;

  // alignment loss w.r.t. alpha on 4x4 slices. Draws whose stencil straddles
  // a kink of the piecewise-bilinear loss (h and h/2 disagree) are skipped.
  double worst_align = 0.0;
  int accepted = 0;
  for (int attempt = 0; attempt < 500 && accepted < 20; ++attempt) {
    const ImageD img = ImageD::Random(4, 4).array() * 0.5 + 0.5;
    Eigen::Vector3d a(std::uniform_real_distribution<double>(-0.3, 0.3)(rng),
                      std::uniform_real_distribution<double>(-0.8, 0.8)(rng),
                      std::uniform_real_distribution<double>(-0.8, 0.8)(rng));
    const auto analytic = alignment_loss(img, RigidParams::from_vec(a), true).grad;
    auto f = [&] { return alignment_loss(img, RigidParams::from_vec(a)).total; };
    Eigen::Vector3d fd, fd_half;
    for (int k = 0; k < 3; ++k) {
      fd[k] = central(&a[k], f, h);
      fd_half[k] = central(&a[k], f, h / 2);
    }
    if ((fd - fd_half).norm() > 1e-6 * std::max(1.0, fd.norm())) continue;
    ++accepted;
    worst_align = std::max(worst_align, (analytic - fd).norm() / std::max({analytic.norm(), fd.norm(), 1e-12}));
  }
  check(accepted >= 10, fmt("alignment samples accepted %d", accepted));
  check(worst_align < 1e-3, fmt("alignment rel err %.2g", worst_align));

  // attention w.r.t. inputs and every projection weight.
  double worst_attn = 0.0;
  for (auto [channels, part] : {std::pair<Index, PartitionSpec>{2, {1, 1}}, {4, {2, 2}}}) {
    auto attn = random_attention(channels, 0, part, true, rng);
    auto x = random_tensor({1, channels, 1, 4, 4}, rng);
    const auto r = random_tensor({1, channels, 1, 4, 4}, rng);
    auto f = [&] { return sean::testing::probe(attn.forward(x), r); };
    nn::ParamRefs<double> params;
    attn.collect(params);
    attn.forward(x);
    nn::zero_grads(params);
    const auto dx = attn.backward(r);
    worst_attn = std::max(worst_attn,
                          sean::testing::relative_error(dx.array(), sean::testing::numeric_gradient(x.data(), x.size(), f, h)));
    for (auto* p : params) {
      const Eigen::ArrayXd analytic = p->grad;
      const Eigen::ArrayXd fd = sean::testing::numeric_gradient(p->value.data(), p->size(), f, h);
      // Key biases shift all logits of a query together; their exact gradient is zero.
      const double err = p->name == "attn.phi.bias" ? (analytic - fd).abs().maxCoeff()
                                                    : sean::testing::relative_error(analytic, fd);
      worst_attn = std::max(worst_attn, err);
    }
  }
  check(worst_attn < 1e-3, fmt("attention rel err %.2g", worst_attn));

  double worst_loss = 0.0;
  for (int i = 0; i < 10; ++i) {
    Tensor<double> z(1, 1, 1, 4, 4), g(1, 1, 1, 4, 4);
    z.array() = sean::testing::random_array(16, rng, -3, 3);
    for (Index k = 0; k < 16; ++k) g.data()[k] = rng() % 3 == 0 ? 1.0 : 0.0;
    Tensor<double> dz;
    combined_loss(z, g, 1.0, 1.0, &dz);
    const auto fd =
        sean::testing::numeric_gradient(z.data(), z.size(), [&] { return combined_loss(z, g, 1.0, 1.0).total; }, h);
    worst_loss = std::max(worst_loss, sean::testing::relative_error(dz.array(), fd));
  }
  check(worst_loss < 1e-3, fmt("combined loss rel err %.2g", worst_loss));
  return check.result(fmt("worst relative errors: alignment %.1e (%d draws), attention %.1e, loss %.1e; bound 1e-3",
                          worst_align, accepted, worst_attn, worst_loss));
}

// ---------------------------------------------------------------------- 5

Result loss_exactness() {
  Checks check;
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    std::vector<double> z(16), p(16), g(16);
    Tensor<double> zt(1, 1, 1, 4, 4), gt(1, 1, 1, 4, 4);
    for (int i = 0; i < 16; ++i) {
      z[i] = std::uniform_real_distribution<double>(-5, 5)(rng);
      p[i] = 1.0 / (1.0 + std::exp(-z[i]));
      g[i] = rng() % 4 == 0 ? 1.0 : 0.0;
      zt.data()[i] = z[i];
      gt.data()[i] = g[i];
    }
    const Eigen::Map<const Eigen::ArrayXd> pa(p.data(), 16), ga(g.data(), 16);
    const double gdl = generalized_dice_loss<double>(pa, ga);
    const auto terms = combined_loss(zt, gt, 1.0, 1.0);
    const double ref = sean::testing::oracle_gdl(p, g);
    worst = std::max({worst, std::abs(gdl - ref),
                      std::abs(terms.total - (ref + sean::testing::oracle_bce(z, g)))});
  }
  check(worst < 1e-6, fmt("loss oracle error %.2g", worst));
  check(nn::poly_lr(1e-4, 0, 1000, 0.9) == 1e-4, "poly_lr at iter 0");
  check(nn::poly_lr(1e-4, 1000, 1000, 0.9) == 0.0, "poly_lr at total_iter");
  bool exact = true;
  for (long i = 0; i <= 1000; ++i)
    exact &= nn::poly_lr(1e-4, i, 1000, 0.9) == 1e-4 * std::pow(1.0 - static_cast<double>(i) / 1000.0, 0.9);
  check(exact, "poly_lr formula");
  return check.result(fmt("max |loss - oracle| %.1e over 20 cases; poly_lr endpoints %.0e and %.0f", worst,
                          nn::poly_lr(1e-4, 0, 1000, 0.9), nn::poly_lr(1e-4, 1000, 1000, 0.9)));
}

// ---------------------------------------------------------------------- 6

Result wiring_equivalence() {
  SegConfig cfg;
  cfg.base_width = 8;
  cfg.fusion = FusionMode::Sea;
  SegModel<float> sea(cfg, 21);
  cfg.fusion = FusionMode::None;
  SegModel<float> none(cfg, 22);
  const Index copied = transplant_parameters(sea, none);
  sea.set_training(false);
  none.set_training(false);
  std::mt19937_64 rng(6);
  int identical = 0;
  for (int i = 0; i < 10; ++i) {
    const auto slab = random_tensor({1, 1, 3, 64, 64}, rng).cast<float>();
    identical += (sea.forward(slab).array() == none.forward(slab).array()).all() ? 1 : 0;
  }
  const bool all_copied = copied == static_cast<Index>(none.parameters().size());
  return {identical == 10 && all_copied,
          fmt("%d/10 slabs bit-identical after transplanting %ld tensors", identical, copied)};
}

// ---------------------------------------------------------------------- 7

struct OverfitSet {
  std::vector<SegCase> cases;
  std::vector<SliceRef> refs;
};

OverfitSet overfit_set() {
  PhantomSpec spec;
  spec.height = spec.width = 64;
  spec.lesion_probability = 1.0;
  OverfitSet set;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const Phantom p = generate_phantom(spec, mix_seed(300, i));
    set.cases.push_back(prepare_case(p.volume, p.truth.lesion_mask, invert_params(p.truth.true_params)));
    const Mask& m = set.cases.back().mask;
    Index best = 0, area = -1;
    for (Index z = 0; z < m.depth(); ++z) {
      const Index a = m.slice(z).cast<Index>().sum();
      if (a > area) {
        area = a;
        best = z;
      }
    }
    set.refs.push_back({static_cast<std::size_t>(i), best});
  }
  return set;
}

double slab_dice(SegModel<float>& model, const OverfitSet& set) {
  const auto prob = predict_probabilities(model, set.cases, set.refs);
  const Index hw = prob.h() * prob.w();
  Mask pred(static_cast<Index>(set.refs.size()), prob.h(), prob.w()), gt(pred.depth(), prob.h(), prob.w());
  for (std::size_t i = 0; i < set.refs.size(); ++i) {
    const auto& mask = set.cases[set.refs[i].case_index].mask;
    for (Index k = 0; k < hw; ++k) {
      pred.data()[i * hw + k] = prob.data()[i * hw + k] > 0.5f ? 1 : 0;
      gt.data()[i * hw + k] = mask.slice(set.refs[i].z).data()[k];
    }
  }
  return dice_coefficient(pred, gt);
}

Result trainability() {
  const OverfitSet set = overfit_set();
  std::string detail;
  bool pass = true;
  for (auto mode : {FusionMode::None, FusionMode::FeatureConcat, FusionMode::Sea}) {
    SegConfig mc;
    mc.base_width = 8;
    mc.fusion = mode;
    SegModel<float> model(mc, 1);
    TrainConfig tc;
    tc.base_lr = 1e-3;
    tc.epochs = 500;
    tc.batch_size = 5;
    tc.checkpoint_every = 50;
    long reached = -1;
    TrainHooks hooks;
    hooks.on_checkpoint = [&](long iter, SegModel<float>& m) {
      if (reached < 0 && slab_dice(m, set) >= 0.95) reached = iter;
    };
    const auto t0 = std::chrono::steady_clock::now();
    train_segmentation(model, set.cases, tc, [&](std::mt19937_64&) { return set.refs; }, hooks);
    const double secs = elapsed(t0);
    const double dice = slab_dice(model, set);
    const bool ok = dice >= 0.95 && secs < 600.0;
    pass &= ok;
    detail += fmt("%s%s dice %.4f (>= 0.95 first at iter %ld) in %.0f s", detail.empty() ? "" : "; ", to_string(mode),
                  dice, reached, secs);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------------- 8

Result directional_trend() {
  PhantomSpec spec;
  spec.height = spec.width = 64;
  spec.lesion_intensity_delta = -5.0;
  std::vector<SegCase> train, test;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const Phantom p = generate_phantom(spec, mix_seed(500, i));
    SegCase c = prepare_case(p.volume, p.truth.lesion_mask, invert_params(p.truth.true_params));
    (i < 80 ? train : test).push_back(std::move(c));
  }
  std::vector<SliceRef> all_slices;
  for (std::size_t c = 0; c < test.size(); ++c)
    for (Index z = 0; z < test[c].mask.depth(); ++z) all_slices.push_back({c, z});

  auto mean_test_dice = [&](SegModel<float>& model) {
    const auto prob = predict_probabilities(model, test, all_slices);
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& c : test) {
      Mask pred(c.mask.depth(), c.mask.height(), c.mask.width());
      for (Index i = 0; i < pred.size(); ++i, ++k) pred.data()[i] = prob.data()[k] > 0.5f ? 1 : 0;
      sum += dice_coefficient(pred, c.mask);
    }
    return sum / static_cast<double>(test.size());
  };

  std::map<FusionMode, double> mean;
  std::string detail;
  for (std::uint64_t seed : {0, 1, 2}) {
    detail += fmt("%sseed %lu:", detail.empty() ? "" : "; ", seed);
    for (auto mode : {FusionMode::None, FusionMode::Sea}) {
      SegConfig mc;
      mc.base_width = 8;
      mc.fusion = mode;
      SegModel<float> model(mc, seed);
      TrainConfig tc;
      tc.base_lr = 1e-3;
      tc.epochs = 10;
      tc.batch_size = 4;
      tc.seed = seed;
      train_segmentation(model, train, tc);
      const double d = mean_test_dice(model);
      mean[mode] += d / 3.0;
      detail += fmt(" %s %.4f", to_string(mode), d);
    }
  }
  return {mean[FusionMode::Sea] >= mean[FusionMode::None],
          fmt("mean test dice sea %.4f vs none %.4f; ", mean[FusionMode::Sea], mean[FusionMode::None]) + detail};
}

// ---------------------------------------------------------------------- 9

Mask rows(std::initializer_list<std::initializer_list<int>> r) {
  Mask m(1, static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
  Index y = 0;
  for (const auto& row : r) {
    Index x = 0;
    for (int v : row) m(0, y, x++) = static_cast<std::uint8_t>(v);
    ++y;
  }
  return m;
}

Result metrics_suite() {
  Checks check;
  const Mask a = rows({{1, 1, 0, 0}, {1, 1, 0, 0}});
  const Mask b = rows({{0, 1, 1, 0}, {0, 1, 1, 0}});
  const Mask far = rows({{0, 0, 1, 1}, {0, 0, 1, 1}});
  check(dice_coefficient(a, a) == 1.0, "dice identity");
  check(dice_coefficient(a, far) == 0.0, "dice disjoint");
  check(dice_coefficient(a, b) == 0.5, "dice overlap 2 of 4+4");
  check(dice_coefficient(Mask(1, 2, 2), Mask(1, 2, 2)) == 1.0, "dice both empty");

  check(connected_components(Mask(1, 4, 4)).empty(), "cc empty");
  check(connected_components(rows({{1, 0}, {0, 1}})).size() == 1, "cc diagonal");
  check(connected_components(rows({{1, 0, 1, 0}, {0, 1, 0, 1}, {1, 0, 1, 0}, {0, 1, 0, 1}})).size() == 1,
        "cc checkerboard");

  const Mask three = rows({{1, 0, 1, 0, 1}, {1, 0, 0, 0, 1}});
  const auto perfect = lesion_prf(three, three).scores;
  check(perfect.recall == 1.0 && perfect.precision == 1.0 && perfect.f1 == 1.0, "prf perfect");
  const auto half = lesion_prf(rows({{0, 1, 0, 0, 0, 0}, {0, 0, 0, 1, 0, 0}}),
                               rows({{1, 1, 0, 0, 0, 1}, {1, 1, 0, 0, 0, 0}}), 0.2)
                        .scores;
  check(half.recall == 0.5 && half.precision == 0.5 && half.f1 == 0.5, "prf one of two");
  const auto greedy = lesion_prf(rows({{1, 1, 1}}), rows({{1, 0, 1}})).scores;
  check(greedy.recall == 0.5 && greedy.precision == 1.0 && std::abs(greedy.f1 - 2.0 / 3.0) < 1e-15,
        "prf one prediction over two lesions");
  const Mask none(1, 1, 3), some = rows({{0, 1, 0}});
  const auto e0 = lesion_prf(none, none).scores, e1 = lesion_prf(some, none).scores,
             e2 = lesion_prf(none, some).scores;
  check(e0.recall == 1 && e0.precision == 1 && e0.f1 == 1, "prf nothing at all");
  check(e1.recall == 1 && e1.precision == 0 && e1.f1 == 0, "prf predictions without lesions");
  check(e2.recall == 0 && e2.precision == 1 && e2.f1 == 0, "prf missed lesions");

  const double rad = 1.0 / kDeg;
  check(alignment_error({0.1, 2, 3}, {0.1, 2, 3}).theta_deg == 0.0, "alignment error zero");
  check(std::abs(alignment_error({179 * rad, 0, 0}, {-179 * rad, 0, 0}).theta_deg - 2.0) < 1e-9,
        "alignment error wrap-around");

  std::mt19937_64 rng(9);
  int agree = 0;
  for (int i = 0; i < 200; ++i) {
    const Mask pred = sean::testing::random_blobs(rng, 2, 8, 8, 5);
    const Mask gt = sean::testing::random_blobs(rng, 2, 8, 8, 5);
    const double thr = (i % 5) * 0.1;
    const auto lib = lesion_prf(pred, gt, thr).counts;
    const auto ref = sean::testing::oracle_matching(pred, gt, thr);
    agree += lib.tp == ref.tp && lib.n_gt == ref.n_gt && lib.n_pred == ref.n_pred ? 1 : 0;
  }
  check(agree == 200, fmt("oracle agreement %d/200", agree));
  return check.result(fmt("examples and %d/200 randomized matching cases agree with the oracle", agree));
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"alignment accuracy", alignment_accuracy}, {"alignment speed", alignment_speed},
      {"attention suite", attention_suite},       {"gradient checks", gradient_checks},
      {"loss and schedule", loss_exactness},      {"wiring equivalence", wiring_equivalence},
      {"trainability", trainability},             {"directional trend", directional_trend},
      {"metrics suite", metrics_suite}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("threw: ") + e.what()};
    }
    failures += r.pass ? 0 : 1;
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), r.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
