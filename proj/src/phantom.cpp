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

#include "sean/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace sean {

void CtVolume::validate() const {
  require(voxels.depth() >= 1 && voxels.height() >= 1 && voxels.width() >= 1,
          "volume '" + id + "': all dimensions must be >= 1");
  for (double s : spacing) require(s > 0.0 && std::isfinite(s), "volume '" + id + "': spacing must be positive");
  require(voxels.array().isFinite().all(), "volume '" + id + "': non-finite voxel values");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

constexpr double kBackground = 0.0;
constexpr double kSkull = 250.0;
constexpr double kBrain = 72.0;
constexpr double kTextureStd = 5.0;
constexpr double kTextureClip = 15.0;
constexpr double kVentricleDelta = -12.0;
constexpr double kEdgeWidth = 1.5;
// Smallest slice scale of the head outline and the per-case axis jitter;
// the lesion fit check assumes both at their worst.
constexpr double kMinSliceScale = 0.85;
constexpr double kJitter = 0.05;
constexpr double kLesionReach = 0.9;

struct Geometry {
  double cx, cy;
  double ax, ay;    // outer semi-axes at scale 1
  double skull;     // ring thickness
};

Geometry head_geometry(const PhantomSpec& spec, double jitter_x, double jitter_y) {
  Geometry g;
  g.cx = 0.5 * static_cast<double>(spec.width - 1);
  g.cy = 0.5 * static_cast<double>(spec.height - 1);
  g.ax = 0.34 * static_cast<double>(spec.width) * jitter_x;
  g.ay = 0.42 * static_cast<double>(spec.height) * jitter_y;
  g.skull = std::max(2.0, 0.045 * static_cast<double>(spec.width));
  return g;
}

double slice_scale(Index z, Index depth) {
  const double half = std::max(1.0, 0.5 * static_cast<double>(depth - 1));
  const double u = (static_cast<double>(z) - 0.5 * static_cast<double>(depth - 1)) / half;
  return 1.0 - (1.0 - kMinSliceScale) * u * u;
}

// 1 well inside, 0 well outside, linear across the boundary.
double inside(double px, double py, double ax, double ay) {
  const double rho = std::sqrt(px * px / (ax * ax) + py * py / (ay * ay));
  const double dist = (rho - 1.0) * std::sqrt(ax * ay);
  return std::clamp(0.5 - dist / kEdgeWidth, 0.0, 1.0);
}

double uniform(std::mt19937_64& rng, const Interval& range) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return range.lo + (range.hi - range.lo) * u;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (double& v : k) v /= sum;
  return k;
}

// Separable smoothing along one axis with edge clamping; stride/extent describe the axis.
void smooth_axis(std::vector<double>& data, Index d, Index h, Index w, int axis, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const Index extent = axis == 0 ? d : (axis == 1 ? h : w);
  const Index stride = axis == 0 ? h * w : (axis == 1 ? w : 1);
  std::vector<double> line(extent), out(extent);
  for (Index z = 0; z < (axis == 0 ? 1 : d); ++z)
    for (Index y = 0; y < (axis == 1 ? 1 : h); ++y)
      for (Index x = 0; x < (axis == 2 ? 1 : w); ++x) {
        const Index base = (z * h + y) * w + x;
        for (Index i = 0; i < extent; ++i) line[i] = data[base + i * stride];
        for (Index i = 0; i < extent; ++i) {
          double acc = 0.0;
          for (int j = -radius; j <= radius; ++j) {
            const Index src = std::clamp<Index>(i + j, 0, extent - 1);
            acc += k[j + radius] * line[src];
          }
          out[i] = acc;
        }
        for (Index i = 0; i < extent; ++i) data[base + i * stride] = out[i];
      }
}

// Mirror-symmetric smooth texture with unit standard deviation.
std::vector<double> symmetric_texture(const PhantomSpec& spec, std::mt19937_64& rng) {
  const Index D = spec.num_slices, H = spec.height, W = spec.width;
  std::vector<double> noise(D * H * W);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : noise) v = normal(rng);
  const double sigma = static_cast<double>(W) / 20.0;
  smooth_axis(noise, D, H, W, 2, sigma);
  smooth_axis(noise, D, H, W, 1, sigma);
  if (D > 1) smooth_axis(noise, D, H, W, 0, 0.8);
  std::vector<double> sym(noise.size());
  for (Index z = 0; z < D; ++z)
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x) {
        const Index row = (z * H + y) * W;
        sym[row + x] = 0.5 * (noise[row + x] + noise[row + (W - 1 - x)]);
      }
  double sum = 0.0, sq = 0.0;
  for (double v : sym) sum += v;
  const double mean = sum / static_cast<double>(sym.size());
  for (double v : sym) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(sym.size()));
  for (double& v : sym) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return sym;
}

struct Lesion {
  double x, y, z;  // centre
  double r, rz;
  int side;
};

// Interior semi-axes of the head at its smallest slice scale and jitter.
std::pair<double, double> worst_interior(const PhantomSpec& spec) {
  const Geometry g = head_geometry(spec, 1.0 - kJitter, 1.0 - kJitter);
  return {g.ax * kMinSliceScale - g.skull, g.ay * kMinSliceScale - g.skull};
}

}  // namespace

void PhantomSpec::validate() const {
  require(height >= 16 && width >= 16, "phantom image_size must be at least 16x16");
  require(num_slices >= 1, "phantom num_slices must be >= 1");
  require(rotation_range_deg.lo <= rotation_range_deg.hi && rotation_range_deg.lo >= -45.0 &&
              rotation_range_deg.hi <= 45.0,
          "phantom rotation_range_deg must lie within [-45, 45]");
  const double wmax = static_cast<double>(width) / 4.0, hmax = static_cast<double>(height) / 4.0;
  require(shift_range_px.lo <= shift_range_px.hi && shift_range_px.lo >= -wmax && shift_range_px.hi <= wmax,
          "phantom shift_range_px must lie within +/- width/4");
  require(vshift_range_px.lo <= vshift_range_px.hi && vshift_range_px.lo >= -hmax && vshift_range_px.hi <= hmax,
          "phantom vshift_range_px must lie within +/- height/4");
  require(lesion_probability >= 0.0 && lesion_probability <= 1.0, "phantom lesion_probability must be in [0, 1]");
  require(std::isfinite(lesion_intensity_delta) && lesion_intensity_delta <= 0.0,
          "phantom lesion_intensity_delta must be a finite hypodensity (<= 0)");
  require(lesion_radius_px.lo > 0.0 && lesion_radius_px.lo <= lesion_radius_px.hi,
          "phantom lesion_radius_px must be a positive interval");
  for (double s : spacing) require(s > 0.0 && std::isfinite(s), "phantom spacing must be positive");
  if (lesion_probability > 0.0) {
    const auto [ix, iy] = worst_interior(*this);
    const double r = lesion_radius_px.hi;
    require(2.0 * r + 2.0 <= kLesionReach * ix && r <= kLesionReach * iy,
            "phantom lesion of radius " + std::to_string(r) + " px does not fit inside the skull interior");
  }
}

CanonicalPhantom generate_canonical_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Index D = spec.num_slices, H = spec.height, W = spec.width;
  std::mt19937_64 shape_rng(mix_seed(seed, 1));
  std::mt19937_64 texture_rng(mix_seed(spec.texture_seed, seed));

  const double jx = uniform(shape_rng, {1.0 - kJitter, 1.0 + kJitter});
  const double jy = uniform(shape_rng, {1.0 - kJitter, 1.0 + kJitter});
  const Geometry g = head_geometry(spec, jx, jy);
  const auto texture = symmetric_texture(spec, texture_rng);

  std::optional<Lesion> lesion;
  if (std::uniform_real_distribution<double>(0.0, 1.0)(shape_rng) < spec.lesion_probability) {
    const auto [ix, iy] = worst_interior(spec);
    Lesion l;
    l.side = std::uniform_int_distribution<int>(0, 1)(shape_rng) == 0 ? -1 : 1;
    l.r = uniform(shape_rng, spec.lesion_radius_px);
    l.rz = uniform(shape_rng, {1.0, 2.2});
    const double half = 0.5 * static_cast<double>(D - 1);
    l.z = D > 1 ? uniform(shape_rng, {half - 0.25 * D, half + 0.25 * D}) : 0.0;
    l.z = std::clamp(l.z, 0.0, static_cast<double>(D - 1));
    // Horizontal offset keeps the blob off the midline and inside the interior.
    const double off_x = uniform(shape_rng, {l.r + 2.0, kLesionReach * ix - l.r});
    const double y_reach = std::max(0.0, kLesionReach * iy - l.r);
    double off_y = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double cand = uniform(shape_rng, {-0.5 * y_reach, 0.5 * y_reach});
      const double ex = (off_x + l.r) / ix, ey = (std::abs(cand) + l.r) / iy;
      if (ex * ex + ey * ey <= kLesionReach * kLesionReach) {
        off_y = cand;
        break;
      }
    }
    l.x = g.cx + l.side * off_x;
    l.y = g.cy + off_y;
    lesion = l;
  }

  CanonicalPhantom out;
  out.volume.id = "phantom";
  out.volume.spacing = spec.spacing;
  out.volume.voxels = Volume<float>(D, H, W);
  out.lesion_mask = Mask(D, H, W);
  for (Index z = 0; z < D; ++z) {
    const double s = slice_scale(z, D);
    const double ax = g.ax * s, ay = g.ay * s;
    const double iax = ax - g.skull, iay = ay - g.skull;
    for (Index y = 0; y < H; ++y)
      for (Index x = 0; x < W; ++x) {
        const double px = static_cast<double>(x) - g.cx, py = static_cast<double>(y) - g.cy;
        const double outer = inside(px, py, ax, ay);
        const double inner = inside(px, py, iax, iay);
        // Ventricles: a mirrored pair of darker ellipses.
        const double vx = std::abs(px) - 0.1 * static_cast<double>(W) * s;
        const double vy = py + 0.05 * static_cast<double>(H);
        const double vent = inside(vx, vy, 0.05 * W * s, 0.12 * H * s);
        double brain = kBrain + std::clamp(kTextureStd * texture[(z * H + y) * W + x], -kTextureClip, kTextureClip) +
                       kVentricleDelta * vent;
        if (lesion) {
          const double dx = (static_cast<double>(x) - lesion->x) / lesion->r;
          const double dy = (static_cast<double>(y) - lesion->y) / lesion->r;
          const double dz = (static_cast<double>(z) - lesion->z) / lesion->rz;
          const double q = std::sqrt(dx * dx + dy * dy + dz * dz);
          brain += spec.lesion_intensity_delta * std::clamp((1.2 - q) / 0.4, 0.0, 1.0);
          if (q <= 1.0 && inner > 0.0) out.lesion_mask(z, y, x) = 1;
        }
        const double value = (1.0 - outer) * kBackground + outer * ((1.0 - inner) * kSkull + inner * brain);
        out.volume.voxels(z, y, x) = static_cast<float>(value);
      }
  }
  out.has_lesion = lesion.has_value() && (out.lesion_mask.array() != 0).any();
  out.lesion_side = out.has_lesion ? lesion->side : 0;
  return out;
}

Volume<float> transform_volume(const Volume<float>& voxels, const RigidParams& alpha) {
  Volume<float> out(voxels.depth(), voxels.height(), voxels.width());
  for (Index z = 0; z < voxels.depth(); ++z) out.slice(z) = apply_rigid(voxels.slice(z), alpha);
  return out;
}

Mask transform_mask(const Mask& mask, const RigidParams& alpha) {
  Mask out(mask.depth(), mask.height(), mask.width());
  for (Index z = 0; z < mask.depth(); ++z) {
    const ImageF warped = apply_rigid(mask.slice(z).cast<float>(), alpha);
    out.slice(z) = (warped.array() >= 0.5f).cast<std::uint8_t>().matrix();
  }
  return out;
}

Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  CanonicalPhantom canon = generate_canonical_phantom(spec, seed);
  std::mt19937_64 pose_rng(mix_seed(seed, 2));
  RigidParams alpha;
  alpha.theta = uniform(pose_rng, spec.rotation_range_deg) * std::numbers::pi / 180.0;
  alpha.tx = uniform(pose_rng, spec.shift_range_px);
  alpha.ty = uniform(pose_rng, spec.vshift_range_px);

  Phantom out;
  out.volume.id = canon.volume.id;
  out.volume.spacing = canon.volume.spacing;
  out.volume.voxels = transform_volume(canon.volume.voxels, alpha);
  out.truth.true_params = alpha;
  out.truth.lesion_mask = transform_mask(canon.lesion_mask, alpha);
  out.truth.has_lesion = canon.has_lesion;
  out.truth.lesion_side = canon.lesion_side;
  return out;
}

CtVolume preprocess(const CtVolume& vol) {
  require(!vol.voxels.empty(), "preprocess: empty volume");
  const auto clamped = vol.voxels.array().template cast<double>().max(kWindowLow).min(kWindowHigh).eval();
  const double mean = clamped.mean();
  const double var = (clamped - mean).square().mean();
  if (!(var > 0.0)) fail(ErrorKind::Numeric, "preprocess: volume '" + vol.id + "' has zero variance after clamping");
  const double inv_std = 1.0 / std::sqrt(var);
  CtVolume out;
  out.id = vol.id;
  out.spacing = vol.spacing;
  out.voxels = Volume<float>(vol.voxels.depth(), vol.voxels.height(), vol.voxels.width());
  out.voxels.array() = ((clamped - mean) * inv_std).cast<float>();
  return out;
}

ImageF window_slice(const Eigen::Ref<const ImageF>& slice) {
  return ((slice.array().max(static_cast<float>(kWindowLow)).min(static_cast<float>(kWindowHigh)) -
           static_cast<float>(kWindowLow)) /
          static_cast<float>(kWindowHigh - kWindowLow))
      .matrix();
}

double tissue_fraction(const Eigen::Ref<const ImageF>& slice) {
  if (slice.size() == 0) return 0.0;
  return static_cast<double>((slice.array() > static_cast<float>(kWindowLow)).count()) /
         static_cast<double>(slice.size());
}

Volume<float> extract_slab(const Volume<float>& vol, Index center_index, Index radius) {
  require(center_index >= 0 && center_index < vol.depth(), "extract_slab: center index out of range");
  require(radius >= 0, "extract_slab: radius must be >= 0");
  Volume<float> slab(2 * radius + 1, vol.height(), vol.width());
  for (Index t = -radius; t <= radius; ++t) {
    const Index src = std::clamp<Index>(center_index + t, 0, vol.depth() - 1);
    slab.slice(t + radius) = vol.slice(src);
  }
  return slab;
}

}  // namespace sean
