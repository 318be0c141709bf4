/*
 * Copyright 2026 The RPRR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Decoder-side cleanup of a warped prediction: crack filling with an
// adaptive median and ghost removal with a 3x3 majority test. Filled or
// replaced pixels take their color from the source view by backward warping.

#ifndef RPRR_POSTPROC_H_
#define RPRR_POSTPROC_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rprr/geometry.h"

namespace rprr {

struct FilterConfig {
  int crack_window = 3;
  int crack_max_window = 7;
  int crack_min_neighbors = 3;
  double ghost_range_delta_mm = 100.0;
  // A pixel is a ghost when strictly more than this fraction of its valid
  // neighbors is out of range.
  double ghost_majority = 0.5;
  bool bilinear_color = true;

  // Throws ValidationError.
  void Validate() const;
};

// The image being cleaned. `frozen` (optional, one byte per pixel) marks
// pixels that must not change, e.g. transmitted blocks.
struct PredictionView {
  DepthImage& depth;
  ColorImage& color;
  std::span<const std::uint8_t> frozen = {};
};

struct FilterStats {
  int changed = 0;
  // Hole pixels whose largest window held too few valid neighbors or did
  // not enclose them.
  int left_invalid = 0;
};

// Color of the prediction pixel (i, j) at `raw_depth`, fetched from the
// source view through m_ab^-1; nullopt when it falls outside that view.
std::optional<Rgb> BackwardColor(int i, int j, std::uint16_t raw_depth,
                                 const ColorImage& c_src,
                                 const RigidTransform& m_ab,
                                 const Intrinsics& k, bool bilinear);

FilterStats FillCracks(PredictionView view, const ColorImage& c_src,
                       const RigidTransform& m_ab, const Intrinsics& k,
                       const FilterConfig& cfg = {});

FilterStats RemoveGhosts(PredictionView view, const ColorImage& c_src,
                         const RigidTransform& m_ab, const Intrinsics& k,
                         const FilterConfig& cfg = {});

// FillCracks followed by RemoveGhosts.
FilterStats PostProcess(PredictionView view, const ColorImage& c_src,
                        const RigidTransform& m_ab, const Intrinsics& k,
                        const FilterConfig& cfg = {});

}  // namespace rprr

#endif  // RPRR_POSTPROC_H_
