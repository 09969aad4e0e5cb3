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

#include <cstdint>
#include <optional>
#include <string>

#include "sean/rigid.hpp"
#include "sean/volume.hpp"

namespace sean {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Intensity window used throughout (HU-like units).
inline constexpr double kWindowLow = 40.0;
inline constexpr double kWindowHigh = 100.0;

/// Parameters of the synthetic bilateral head phantom.
struct PhantomSpec {
  Index height = 64;
  Index width = 64;
  Index num_slices = 8;
  Interval rotation_range_deg{-15.0, 15.0};
  Interval shift_range_px{-8.0, 8.0};   // horizontal
  Interval vshift_range_px{-4.0, 4.0};  // vertical
  double lesion_probability = 0.8;
  double lesion_intensity_delta = -10.0;
  Interval lesion_radius_px{3.0, 5.0};
  std::uint64_t texture_seed = 0;
  Spacing spacing{5.0, 1.0, 1.0};

  /// Throws InvalidArgument on out-of-range fields or a lesion that cannot
  /// fit inside the skull interior.
  void validate() const;
};

struct PhantomGroundTruth {
  RigidParams true_params;  // perturbation applied to the canonical phantom
  Mask lesion_mask;         // in the perturbed frame
  bool has_lesion = false;
  int lesion_side = 0;      // -1 left half, +1 right half, 0 none
};

struct Phantom {
  CtVolume volume;
  PhantomGroundTruth truth;
};

/// Symmetric phantom before the rigid perturbation; its lesion mask is in
/// the canonical frame.
struct CanonicalPhantom {
  CtVolume volume;
  Mask lesion_mask;
  bool has_lesion = false;
  int lesion_side = 0;
};

CanonicalPhantom generate_canonical_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Canonical phantom moved by a rigid perturbation sampled from the spec
/// ranges (the same for every slice). Deterministic in (spec, seed).
Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Applies `alpha` to every slice of the volume (zero fill outside).
Volume<float> transform_volume(const Volume<float>& voxels, const RigidParams& alpha);

/// Applies `alpha` to a binary mask (bilinear, thresholded at 0.5).
Mask transform_mask(const Mask& mask, const RigidParams& alpha);

/// Clamp to [40, 100] then standardize the whole case to zero mean and
/// unit (population) variance. Throws Numeric on zero variance.
CtVolume preprocess(const CtVolume& vol);

/// Clamp to [40, 100] and map linearly onto [0, 1]; the alignment input.
ImageF window_slice(const Eigen::Ref<const ImageF>& slice);

/// Fraction of voxels of the slice above the window floor.
double tissue_fraction(const Eigen::Ref<const ImageF>& slice);

/// Slices center-T .. center+T, out-of-range indices replicate the edge slice.
Volume<float> extract_slab(const Volume<float>& vol, Index center_index, Index radius);

/// Deterministic 64-bit mixing used to derive per-case seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace sean
