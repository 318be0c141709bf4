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

#include "rprr/redundancy.h"

#include <cmath>
#include <string>

#include "rprr/errors.h"

namespace rprr {
namespace {

int BlocksFor(int pixels) { return (pixels + kBlockSize - 1) / kBlockSize; }

struct Projection {
  int i = 0;
  int j = 0;
  double z = 0.0;  // meters
  bool in_front = false;
};

// Pixel (i, j) at raw depth `raw` moved through `m` and projected.
Projection Project(int i, int j, std::uint16_t raw, const RigidTransform& m,
                   const Intrinsics& k) {
  const double z = k.ToMillimeters(raw) / 1000.0;
  const double x = (i - k.ic) / k.fx * z;
  const double y = (j - k.jc) / k.fy * z;
  const Eigen::Matrix3d& r = m.rotation();
  const Eigen::Vector3d& t = m.translation();
  const double xp = r(0, 0) * x + r(0, 1) * y + r(0, 2) * z + t(0);
  const double yp = r(1, 0) * x + r(1, 1) * y + r(1, 2) * z + t(1);
  const double zp = r(2, 0) * x + r(2, 1) * y + r(2, 2) * z + t(2);
  Projection p;
  p.z = zp;
  if (!(zp > 0.0)) return p;
  p.in_front = true;
  const double u = k.fx * xp / zp + k.ic;
  const double v = k.fy * yp / zp + k.jc;
  // Keep far-off projections out of int range.
  if (!(std::abs(u) < 1e6) || !(std::abs(v) < 1e6)) {
    p.i = p.j = -1;
    return p;
  }
  p.i = static_cast<int>(std::floor(u + 0.5));
  p.j = static_cast<int>(std::floor(v + 0.5));
  return p;
}

void CheckSameSize(const DepthImage& z, const ColorImage& c,
                   const Intrinsics& k) {
  if (z.width() != c.width() || z.height() != c.height() ||
      z.width() != k.width || z.height() != k.height) {
    throw ValidationError("depth, color, and intrinsics sizes disagree");
  }
}

}  // namespace

BlockSet::BlockSet(int blocks_x, int blocks_y)
    : blocks_x_(blocks_x),
      blocks_y_(blocks_y),
      bits_(static_cast<std::size_t>(blocks_x) * blocks_y, false) {
  if (blocks_x < 0 || blocks_y < 0) {
    throw ValidationError("block grid dimensions must be nonnegative");
  }
}

BlockSet BlockSet::ForImage(int width, int height) {
  return BlockSet(BlocksFor(width), BlocksFor(height));
}

std::size_t BlockSet::Index(const BlockCoord& c) const {
  if (!in_grid(c)) {
    throw ValidationError("block (" + std::to_string(c.bx) + ", " +
                          std::to_string(c.by) + ") is outside the grid");
  }
  return static_cast<std::size_t>(c.by) * blocks_x_ + c.bx;
}

int BlockSet::size() const {
  int n = 0;
  for (bool b : bits_) n += b;
  return n;
}

std::vector<BlockCoord> BlockSet::Coords() const {
  std::vector<BlockCoord> out;
  for (int by = 0; by < blocks_y_; ++by) {
    for (int bx = 0; bx < blocks_x_; ++bx) {
      if (bits_[static_cast<std::size_t>(by) * blocks_x_ + bx]) {
        out.push_back({bx, by});
      }
    }
  }
  return out;
}

BlockSet BlockSet::operator|(const BlockSet& other) const {
  if (blocks_x_ != other.blocks_x_ || blocks_y_ != other.blocks_y_) {
    throw ValidationError("block sets over different grids");
  }
  BlockSet out = *this;
  for (std::size_t n = 0; n < bits_.size(); ++n) {
    out.bits_[n] = bits_[n] || other.bits_[n];
  }
  return out;
}

std::vector<std::uint8_t> BlockSet::ToBitmap() const {
  std::vector<std::uint8_t> out((bits_.size() + 7) / 8, 0);
  for (std::size_t n = 0; n < bits_.size(); ++n) {
    if (bits_[n]) out[n / 8] |= static_cast<std::uint8_t>(1u << (n % 8));
  }
  return out;
}

BlockSet BlockSet::FromBitmap(std::span<const std::uint8_t> bytes,
                              int blocks_x, int blocks_y) {
  BlockSet out(blocks_x, blocks_y);
  const std::size_t n_bits = out.bits_.size();
  if (bytes.size() != (n_bits + 7) / 8) {
    throw MalformedPayloadError("block bitmap has " +
                                std::to_string(bytes.size()) +
                                " bytes, expected " +
                                std::to_string((n_bits + 7) / 8));
  }
  for (std::size_t n = 0; n < bytes.size() * 8; ++n) {
    const bool bit = (bytes[n / 8] >> (n % 8)) & 1u;
    if (n < n_bits) {
      out.bits_[n] = bit;
    } else if (bit) {
      throw MalformedPayloadError("block bitmap padding bits are set");
    }
  }
  return out;
}

WarpResult WarpImage(const DepthImage& z, const ColorImage& c,
                     const RigidTransform& m, const Intrinsics& k) {
  CheckSameSize(z, c, k);
  const int w = z.width(), h = z.height();
  WarpResult out;
  out.depth = DepthImage(w, h);
  out.color = ColorImage(w, h);
  out.hit_count.assign(static_cast<std::size_t>(w) * h, 0);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::uint16_t raw = z.at(i, j);
      if (raw == 0) continue;
      const Projection p = Project(i, j, raw, m, k);
      if (!p.in_front) {
        ++out.dropped_behind;
        continue;
      }
      if (!out.depth.contains(p.i, p.j)) {
        ++out.dropped_out_of_frame;
        continue;
      }
      const std::uint16_t dest = k.FromMillimeters(1000.0 * p.z);
      if (dest == 0) {
        ++out.dropped_behind;
        continue;
      }
      std::uint16_t& hits =
          out.hit_count[static_cast<std::size_t>(p.j) * w + p.i];
      if (hits == 0 || dest < out.depth.at(p.i, p.j)) {
        out.depth.at(p.i, p.j) = dest;
        out.color.set(p.i, p.j, c.at(i, j));
      }
      if (hits < UINT16_MAX) ++hits;
    }
  }
  return out;
}

BlockSet PredictionSet(const WarpResult& warp, int empty_threshold) {
  const int w = warp.depth.width(), h = warp.depth.height();
  BlockSet out = BlockSet::ForImage(w, h);
  for (int by = 0; by < out.blocks_y(); ++by) {
    for (int bx = 0; bx < out.blocks_x(); ++bx) {
      int count = 0;
      for (int j = by * kBlockSize; j < std::min(h, (by + 1) * kBlockSize);
           ++j) {
        for (int i = bx * kBlockSize; i < std::min(w, (bx + 1) * kBlockSize);
             ++i) {
          count += warp.hits(i, j) > 0;
        }
      }
      if (count <= empty_threshold) out.insert({bx, by});
    }
  }
  return out;
}

namespace {

BlockSet Validate(const DepthImage& z_b, const RigidTransform& m_inv,
                  const Intrinsics& k, const DepthImage* z_a,
                  double tolerance_mm) {
  const int w = z_b.width(), h = z_b.height();
  if (w != k.width || h != k.height) {
    throw ValidationError("depth image and intrinsics sizes disagree");
  }
  BlockSet out = BlockSet::ForImage(w, h);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::uint16_t raw = z_b.at(i, j);
      if (raw == 0) continue;
      const BlockCoord block{i / kBlockSize, j / kBlockSize};
      if (out.contains(block)) continue;
      const Projection p = Project(i, j, raw, m_inv, k);
      if (!p.in_front || !z_b.contains(p.i, p.j)) {
        out.insert(block);
        continue;
      }
      if (z_a == nullptr) continue;
      const std::uint16_t seen = z_a->at(p.i, p.j);
      if (seen == 0 ||
          k.ToMillimeters(seen) < 1000.0 * p.z - tolerance_mm) {
        out.insert(block);
      }
    }
  }
  return out;
}

}  // namespace

BlockSet ValidationSet(const DepthImage& z_b, const RigidTransform& m_inv,
                       const Intrinsics& k) {
  return Validate(z_b, m_inv, k, nullptr, 0.0);
}

BlockSet ValidationSet(const DepthImage& z_b, const RigidTransform& m_inv,
                       const Intrinsics& k, const DepthImage& z_a,
                       double tolerance_mm) {
  if (z_a.width() != z_b.width() || z_a.height() != z_b.height()) {
    throw ValidationError("depth images differ in size");
  }
  return Validate(z_b, m_inv, k, &z_a, tolerance_mm);
}

std::vector<PayloadBlock> PayloadBlocks(const DepthImage& z_b,
                                        const ColorImage& c_b,
                                        const BlockSet& blocks) {
  if (z_b.width() != c_b.width() || z_b.height() != c_b.height()) {
    throw ValidationError("depth and color sizes disagree");
  }
  const BlockSet grid = BlockSet::ForImage(z_b.width(), z_b.height());
  if (blocks.blocks_x() != grid.blocks_x() ||
      blocks.blocks_y() != grid.blocks_y()) {
    throw ValidationError("block set does not match the image grid");
  }
  std::vector<PayloadBlock> out;
  for (const BlockCoord& c : blocks.Coords()) {
    PayloadBlock b;
    b.coord = c;
    for (int y = 0; y < kBlockSize; ++y) {
      for (int x = 0; x < kBlockSize; ++x) {
        const int i = c.bx * kBlockSize + x, j = c.by * kBlockSize + y;
        if (!z_b.contains(i, j)) continue;
        b.depth[y * kBlockSize + x] = z_b.at(i, j);
        b.color[y * kBlockSize + x] = c_b.at(i, j);
      }
    }
    out.push_back(b);
  }
  return out;
}

Reconstruction StitchReconstruct(const DepthImage& z_a, const ColorImage& c_a,
                                 const RigidTransform& m_ab,
                                 const Intrinsics& k,
                                 std::span<const PayloadBlock> payload) {
  Reconstruction r;
  r.warp = WarpImage(z_a, c_a, m_ab, k);
  r.depth = r.warp.depth;
  r.color = r.warp.color;
  const int w = z_a.width(), h = z_a.height();
  r.transmitted.assign(static_cast<std::size_t>(w) * h, 0);
  BlockSet seen = BlockSet::ForImage(w, h);
  for (const PayloadBlock& b : payload) {
    if (!seen.in_grid(b.coord)) {
      throw MalformedPayloadError("payload block outside the image grid");
    }
    if (seen.contains(b.coord)) {
      throw MalformedPayloadError("payload repeats block (" +
                                  std::to_string(b.coord.bx) + ", " +
                                  std::to_string(b.coord.by) + ")");
    }
    seen.insert(b.coord);
    for (int y = 0; y < kBlockSize; ++y) {
      for (int x = 0; x < kBlockSize; ++x) {
        const int i = b.coord.bx * kBlockSize + x;
        const int j = b.coord.by * kBlockSize + y;
        if (i >= w || j >= h) continue;
        r.depth.at(i, j) = b.depth[y * kBlockSize + x];
        r.color.set(i, j, b.color[y * kBlockSize + x]);
        r.transmitted[static_cast<std::size_t>(j) * w + i] = 1;
      }
    }
  }
  return r;
}

}  // namespace rprr
