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

#ifndef RPRR_REDUNDANCY_H_
#define RPRR_REDUNDANCY_H_

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "rprr/geometry.h"

namespace rprr {

inline constexpr int kBlockSize = 8;

struct BlockCoord {
  int bx = 0;
  int by = 0;
  auto operator<=>(const BlockCoord& o) const {
    if (auto c = by <=> o.by; c != 0) return c;
    return bx <=> o.bx;
  }
  bool operator==(const BlockCoord&) const = default;
};

// Membership bitmap over the 8x8 block grid of one image.
class BlockSet {
 public:
  BlockSet() = default;
  BlockSet(int blocks_x, int blocks_y);
  static BlockSet ForImage(int width, int height);

  int blocks_x() const { return blocks_x_; }
  int blocks_y() const { return blocks_y_; }
  int grid_size() const { return blocks_x_ * blocks_y_; }

  bool contains(const BlockCoord& c) const { return bits_[Index(c)]; }
  bool in_grid(const BlockCoord& c) const {
    return c.bx >= 0 && c.by >= 0 && c.bx < blocks_x_ && c.by < blocks_y_;
  }
  void insert(const BlockCoord& c) { bits_[Index(c)] = true; }
  void erase(const BlockCoord& c) { bits_[Index(c)] = false; }
  int size() const;
  bool empty() const { return size() == 0; }

  // Members in row-major grid order.
  std::vector<BlockCoord> Coords() const;

  BlockSet operator|(const BlockSet& other) const;
  bool operator==(const BlockSet&) const = default;

  // Row-major, least significant bit first, zero padding bits.
  std::vector<std::uint8_t> ToBitmap() const;
  // Throws MalformedPayloadError on a size mismatch or nonzero padding.
  static BlockSet FromBitmap(std::span<const std::uint8_t> bytes, int blocks_x,
                             int blocks_y);

 private:
  std::size_t Index(const BlockCoord& c) const;

  int blocks_x_ = 0;
  int blocks_y_ = 0;
  std::vector<bool> bits_;
};

struct WarpResult {
  DepthImage depth;
  ColorImage color;
  std::vector<std::uint16_t> hit_count;  // row-major, one per pixel
  int dropped_out_of_frame = 0;
  int dropped_behind = 0;

  std::uint16_t hits(int i, int j) const {
    return hit_count[static_cast<std::size_t>(j) * depth.width() + i];
  }
};

// Forward-warps every valid source pixel through `m` to the nearest
// destination pixel; collisions keep the smaller depth (first pixel in
// raster order on ties) and its color.
WarpResult WarpImage(const DepthImage& z, const ColorImage& c,
                     const RigidTransform& m, const Intrinsics& k);

// Blocks that received at most `empty_threshold` warped pixels.
BlockSet PredictionSet(const WarpResult& warp, int empty_threshold = 0);

// Blocks of Z_b holding a pixel that leaves sensor a's frame under m_inv.
BlockSet ValidationSet(const DepthImage& z_b, const RigidTransform& m_inv,
                       const Intrinsics& k);

// As above, also marking pixels that land inside sensor a's frame where Z_a
// is missing or nearer by more than `tolerance_mm` (occluded from a).
BlockSet ValidationSet(const DepthImage& z_b, const RigidTransform& m_inv,
                       const Intrinsics& k, const DepthImage& z_a,
                       double tolerance_mm);

struct PayloadBlock {
  BlockCoord coord;
  // Row-major tiles; samples beyond the image border are zero.
  std::array<std::uint16_t, kBlockSize * kBlockSize> depth{};
  std::array<Rgb, kBlockSize * kBlockSize> color{};

  bool operator==(const PayloadBlock&) const = default;
};

std::vector<PayloadBlock> PayloadBlocks(const DepthImage& z_b,
                                        const ColorImage& c_b,
                                        const BlockSet& blocks);

struct Reconstruction {
  DepthImage depth;
  ColorImage color;
  // Per pixel: 1 where the value came from a transmitted block.
  std::vector<std::uint8_t> transmitted;
  WarpResult warp;
};

// Warps Z_a/C_a into sensor b's view and overwrites the payload blocks.
// Throws MalformedPayloadError for duplicate or out-of-grid coordinates.
Reconstruction StitchReconstruct(const DepthImage& z_a, const ColorImage& c_a,
                                 const RigidTransform& m_ab,
                                 const Intrinsics& k,
                                 std::span<const PayloadBlock> payload);

}  // namespace rprr

#endif  // RPRR_REDUNDANCY_H_
