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

// Progressive wavelet color coder: reversible color transform, 5/3 integer
// lifting, deadzone quantization and context-modelled bit-plane coding. The
// stream is split into one length-prefixed section per resolution, coarsest
// first, so any prefix ending on a section boundary decodes.

#ifndef RPRR_COLOR_CODEC_H_
#define RPRR_COLOR_CODEC_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/redundancy.h"

namespace rprr {

inline constexpr int kMaxColorQuality = 100;
inline constexpr int kMaxWaveletLevels = 5;

// Quantizer step for the finest bands at `quality`; 1 at quality 100.
double QualityStep(int quality);

// Width and height are padded up to a multiple of 8 internally. Throws
// ValidationError for an empty image, a size above 65535 or a quality
// outside 0..100.
//
// With a nonempty `roi` (one byte per pixel), only the pixels it marks are
// kept: they decode exactly as without the mask, everything else is
// unspecified.
std::vector<std::uint8_t> EncodeColor(const ColorImage& image, int quality,
                                      std::span<const std::uint8_t> roi = {});

struct ColorStreamInfo {
  int width = 0;
  int height = 0;
  int quality = 0;
  int levels = 0;
  std::size_t header_bytes = 0;
  // Stream offset just past each resolution section.
  std::vector<std::size_t> section_ends;
};

// Throws DecodeError on a malformed header or section table.
ColorStreamInfo InspectColor(std::span<const std::uint8_t> bits);

// Decodes the sections that end within `max_bytes` (all of them when
// absent; a missing section is then an error). Throws DecodeError.
ColorImage DecodeColor(std::span<const std::uint8_t> bits,
                       std::optional<std::size_t> max_bytes = std::nullopt);

// Full-size canvas holding the payload colors; every other pixel is filled
// by push-pull interpolation so it costs few bits.
ColorImage PayloadCanvas(std::span<const PayloadBlock> blocks, int width,
                         int height);

// One byte per pixel, set inside the payload blocks.
std::vector<std::uint8_t> PayloadMask(std::span<const PayloadBlock> blocks,
                                      int width, int height);

// Copies each block's colors out of a decoded canvas.
void ExtractPayloadColor(const ColorImage& canvas,
                         std::span<PayloadBlock> blocks);

}  // namespace rprr

#endif  // RPRR_COLOR_CODEC_H_
