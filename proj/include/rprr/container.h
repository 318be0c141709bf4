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

// Self-describing payload container: everything a station needs, besides
// sensor a's own frame, to rebuild sensor b's view.

#ifndef RPRR_CONTAINER_H_
#define RPRR_CONTAINER_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/redundancy.h"

namespace rprr {

inline constexpr std::uint8_t kContainerVersion = 1;
// Fixed part: magic, version, flags, reserved, intrinsics hash, pose, grid.
inline constexpr std::size_t kContainerHeaderBytes = 116;
// Three u32 section lengths and the trailing CRC32.
inline constexpr std::size_t kContainerFramingBytes = 12 + 4;

enum ContainerFlags : std::uint8_t {
  // Every block is present (independent transmission or fallback).
  kFlagFullFrame = 1,
};

struct ContainerParts {
  std::uint8_t flags = 0;
  std::uint64_t intrinsics_hash = 0;
  RigidTransform m_ab;
  BlockSet blocks;
  std::vector<std::uint8_t> depth;
  std::vector<std::uint8_t> color;

  bool operator==(const ContainerParts&) const = default;
};

// Throws ValidationError when the coded sections are empty for a non-empty
// block set or vice versa.
std::vector<std::uint8_t> PackContainer(const ContainerParts& parts);

// Throws ContainerError on bad magic, version, checksum or lengths; a short
// buffer names the section that was cut.
ContainerParts UnpackContainer(std::span<const std::uint8_t> bytes);

std::size_t ContainerSize(const ContainerParts& parts);

}  // namespace rprr

#endif  // RPRR_CONTAINER_H_
