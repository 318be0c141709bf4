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

// Lossless depth tile coder: raster-order differences inside each 8x8 tile,
// coded as (magnitude class, raw bits) with canonical Huffman tables chosen
// by the class of the previous residual.

#ifndef RPRR_DEPTH_CODEC_H_
#define RPRR_DEPTH_CODEC_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/redundancy.h"

namespace rprr {

using DepthTile = std::array<std::uint16_t, kBlockSize * kBlockSize>;

// Throws ValidationError for an empty tile list.
std::vector<std::uint8_t> EncodeDepth(std::span<const DepthTile> tiles);

// Throws DecodeError (with byte offset) on truncation, checksum mismatch, or
// an inconsistent stream; never returns partial output.
std::vector<DepthTile> DecodeDepth(std::span<const std::uint8_t> bytes);

// Every block of the frame in row-major grid order; samples beyond the
// border are zero.
std::vector<DepthTile> FrameTiles(const DepthImage& z);
DepthImage FrameFromTiles(std::span<const DepthTile> tiles, int width,
                          int height);

std::vector<DepthTile> PayloadDepthTiles(std::span<const PayloadBlock> blocks);

}  // namespace rprr

#endif  // RPRR_DEPTH_CODEC_H_
