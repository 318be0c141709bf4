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

#include "rprr/postproc.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "rprr/errors.h"

namespace rprr {
namespace {

bool Frozen(const PredictionView& v, int i, int j) {
  return !v.frozen.empty() &&
         v.frozen[static_cast<std::size_t>(j) * v.depth.width() + i] != 0;
}

// Lower median; reorders `values`.
std::uint16_t Median(std::vector<std::uint16_t>& values) {
  const auto mid = values.begin() + (values.size() - 1) / 2;
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

// Color for a pixel whose depth was replaced: backward warp, else the color
// of a neighbor at the chosen depth.
Rgb RefetchColor(const PredictionView& v, const DepthImage& depth_in,
                 const ColorImage& color_in, int i, int j, std::uint16_t z,
                 int radius, const ColorImage& c_src, const RigidTransform& m_ab,
                 const Intrinsics& k, bool bilinear) {
  if (auto c = BackwardColor(i, j, z, c_src, m_ab, k, bilinear)) return *c;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int x = i + dx, y = j + dy;
      if (depth_in.contains(x, y) && depth_in.at(x, y) == z) return color_in.at(x, y);
    }
  }
  return v.color.at(i, j);
}

}  // namespace

void FilterConfig::Validate() const {
  if (crack_window < 3 || crack_window % 2 == 0 || crack_max_window % 2 == 0 ||
      crack_max_window < crack_window) {
    throw ValidationError("crack windows must be odd, at least 3, and ordered");
  }
  if (crack_min_neighbors < 1) {
    throw ValidationError("crack filling needs at least one neighbor");
  }
  if (!(ghost_range_delta_mm > 0)) {
    throw ValidationError("ghost range delta must be positive");
  }
  if (!(ghost_majority >= 0 && ghost_majority < 1)) {
    throw ValidationError("ghost majority must be within [0, 1)");
  }
}

std::optional<Rgb> BackwardColor(int i, int j, std::uint16_t raw_depth,
                                 const ColorImage& c_src,
                                 const RigidTransform& m_ab,
                                 const Intrinsics& k, bool bilinear) {
  if (raw_depth == 0) return std::nullopt;
  const double z = k.ToMillimeters(raw_depth) / 1000.0;
  const Eigen::Vector3d x_b((i - k.ic) / k.fx * z, (j - k.jc) / k.fy * z, z);
  const Eigen::Vector3d x_a = m_ab.inverse() * x_b;
  if (x_a.z() <= 0) return std::nullopt;
  const double si = k.fx * x_a.x() / x_a.z() + k.ic;
  const double sj = k.fy * x_a.y() / x_a.z() + k.jc;
  const int w = c_src.width(), h = c_src.height();
  if (!bilinear) {
    const int ni = static_cast<int>(std::floor(si + 0.5));
    const int nj = static_cast<int>(std::floor(sj + 0.5));
    if (!c_src.contains(ni, nj)) return std::nullopt;
    return c_src.at(ni, nj);
  }
  if (si < -0.5 || sj < -0.5 || si > w - 0.5 || sj > h - 0.5) return std::nullopt;
  const double ci = std::clamp(si, 0.0, w - 1.0), cj = std::clamp(sj, 0.0, h - 1.0);
  const int i0 = std::min(static_cast<int>(ci), w - 1);
  const int j0 = std::min(static_cast<int>(cj), h - 1);
  const int i1 = std::min(i0 + 1, w - 1), j1 = std::min(j0 + 1, h - 1);
  const double ax = ci - i0, ay = cj - j0;
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double v = (1 - ay) * ((1 - ax) * c_src.at(i0, j0)[c] + ax * c_src.at(i1, j0)[c]) +
                     ay * ((1 - ax) * c_src.at(i0, j1)[c] + ax * c_src.at(i1, j1)[c]);
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
  return out;
}

FilterStats FillCracks(PredictionView view, const ColorImage& c_src,
                       const RigidTransform& m_ab, const Intrinsics& k,
                       const FilterConfig& cfg) {
  cfg.Validate();
  const DepthImage depth_in = view.depth;
  const ColorImage color_in = view.color;
  FilterStats stats;
  std::vector<std::uint16_t> neighbors;
  for (int j = 0; j < depth_in.height(); ++j) {
    for (int i = 0; i < depth_in.width(); ++i) {
      if (depth_in.valid(i, j) || Frozen(view, i, j)) continue;
      bool filled = false;
      for (int window = cfg.crack_window; window <= cfg.crack_max_window && !filled;
           window += 2) {
        const int r = window / 2;
        neighbors.clear();
        // Left, right, above, below; the image edge closes a side.
        std::array<bool, 4> sides{i == 0, i + 1 == depth_in.width(), j == 0,
                                  j + 1 == depth_in.height()};
        for (int dy = -r; dy <= r; ++dy) {
          for (int dx = -r; dx <= r; ++dx) {
            const int x = i + dx, y = j + dy;
            if (depth_in.contains(x, y) && depth_in.valid(x, y)) {
              neighbors.push_back(depth_in.at(x, y));
              sides[0] = sides[0] || dx < 0;
              sides[1] = sides[1] || dx > 0;
              sides[2] = sides[2] || dy < 0;
              sides[3] = sides[3] || dy > 0;
            }
          }
        }
        // A crack is enclosed; a hole open to one side is a border.
        if (static_cast<int>(neighbors.size()) < cfg.crack_min_neighbors ||
            !(sides[0] && sides[1] && sides[2] && sides[3])) {
          continue;
        }
        const std::uint16_t z = Median(neighbors);
        view.depth.at(i, j) = z;
        view.color.set(i, j, RefetchColor(view, depth_in, color_in, i, j, z, r, c_src,
                                          m_ab, k, cfg.bilinear_color));
        filled = true;
      }
      if (filled) {
        ++stats.changed;
      } else {
        ++stats.left_invalid;
      }
    }
  }
  return stats;
}

FilterStats RemoveGhosts(PredictionView view, const ColorImage& c_src,
                         const RigidTransform& m_ab, const Intrinsics& k,
                         const FilterConfig& cfg) {
  cfg.Validate();
  const DepthImage depth_in = view.depth;
  const ColorImage color_in = view.color;
  FilterStats stats;
  std::vector<std::uint16_t> outliers;
  // The outermost ring lacks a full window.
  for (int j = 1; j + 1 < depth_in.height(); ++j) {
    for (int i = 1; i + 1 < depth_in.width(); ++i) {
      if (!depth_in.valid(i, j) || Frozen(view, i, j)) continue;
      const double center = k.ToMillimeters(depth_in.at(i, j));
      int valid = 0;
      outliers.clear();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = i + dx, y = j + dy;
          if ((dx == 0 && dy == 0) || !depth_in.valid(x, y)) {
            continue;
          }
          ++valid;
          if (std::abs(k.ToMillimeters(depth_in.at(x, y)) - center) > cfg.ghost_range_delta_mm) {
            outliers.push_back(depth_in.at(x, y));
          }
        }
      }
      if (valid == 0 || outliers.size() <= cfg.ghost_majority * valid) continue;
      const std::uint16_t z = Median(outliers);
      view.depth.at(i, j) = z;
      view.color.set(i, j, RefetchColor(view, depth_in, color_in, i, j, z, 1, c_src,
                                        m_ab, k, cfg.bilinear_color));
      ++stats.changed;
    }
  }
  return stats;
}

FilterStats PostProcess(PredictionView view, const ColorImage& c_src,
                        const RigidTransform& m_ab, const Intrinsics& k,
                        const FilterConfig& cfg) {
  const FilterStats cracks = FillCracks(view, c_src, m_ab, k, cfg);
  const FilterStats ghosts = RemoveGhosts(view, c_src, m_ab, k, cfg);
  return {cracks.changed + ghosts.changed, cracks.left_invalid};
}

}  // namespace rprr
