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

// Reading and writing depth/color rasters and camera intrinsics.
//
// Depth: 16-bit single channel, binary PGM (P5, maxval 65535, big endian) or
// PNG. Color: 8-bit RGB, binary PPM (P6) or PNG. Formats are chosen by file
// extension. All failures raise IngestionError naming the file.

#ifndef RPRR_IMAGE_IO_H_
#define RPRR_IMAGE_IO_H_

#include <map>
#include <string>

#include "rprr/geometry.h"

namespace rprr {

DepthImage ReadDepthImage(const std::string& path);
void WriteDepthImage(const std::string& path, const DepthImage& image);

ColorImage ReadColorImage(const std::string& path);
void WriteColorImage(const std::string& path, const ColorImage& image);

// Plain-text `key = value` lines; `#` starts a comment. Keys are trimmed.
std::map<std::string, std::string> ParseKeyValueText(const std::string& text,
                                                     const std::string& origin);
std::map<std::string, std::string> ReadKeyValueFile(const std::string& path);

// Keys: fx, fy, ic, jc, width, height, depth_scale (optional, default 1).
Intrinsics ReadIntrinsicsFile(const std::string& path);
void WriteIntrinsicsFile(const std::string& path, const Intrinsics& k);

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::string& bytes);

}  // namespace rprr

#endif  // RPRR_IMAGE_IO_H_
