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

#include "rprr/container.h"

#include <array>
#include <string>

#include <zlib.h>

#include "rprr/errors.h"
#include "rprr/wire.h"

namespace rprr {
namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'R', 'P', 'R', 'R'};

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::size_t ContainerSize(const ContainerParts& parts) {
  return kContainerHeaderBytes + kContainerFramingBytes +
         (static_cast<std::size_t>(parts.blocks.grid_size()) + 7) / 8 +
         parts.depth.size() + parts.color.size();
}

std::vector<std::uint8_t> PackContainer(const ContainerParts& parts) {
  if (parts.blocks.empty() != (parts.depth.empty() || parts.color.empty()) ||
      parts.depth.empty() != parts.color.empty()) {
    throw ValidationError("coded sections must be present exactly when blocks are");
  }
  if (parts.blocks.blocks_x() > 0xffff || parts.blocks.blocks_y() > 0xffff) {
    throw ValidationError("block grid too large for the container");
  }
  ByteWriter w;
  w.Bytes(kMagic);
  w.U8(kContainerVersion);
  w.U8(parts.flags);
  w.U16(0);
  w.U64(parts.intrinsics_hash);
  const Eigen::Matrix4d m = parts.m_ab.matrix();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) w.F64(m(r, c));
  }
  w.U16(static_cast<std::uint16_t>(parts.blocks.blocks_x()));
  w.U16(static_cast<std::uint16_t>(parts.blocks.blocks_y()));
  for (const auto& section : {parts.blocks.ToBitmap(), parts.depth, parts.color}) {
    w.U32(static_cast<std::uint32_t>(section.size()));
    w.Bytes(section);
  }
  w.U32(Crc32(w.data()));
  return w.Take();
}

ContainerParts UnpackContainer(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kContainerHeaderBytes) {
    throw ContainerError("container truncated in the header (" +
                         std::to_string(bytes.size()) + " bytes)");
  }
  ByteReader r(bytes);
  for (std::uint8_t expected : kMagic) {
    if (r.U8() != expected) throw ContainerError("container has a bad magic");
  }
  if (r.U8() != kContainerVersion) {
    throw ContainerError("unsupported container version");
  }
  ContainerParts parts;
  parts.flags = r.U8();
  r.U16();
  parts.intrinsics_hash = r.U64();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  for (int row = 0; row < 3; ++row) {
    for (int c = 0; c < 4; ++c) m(row, c) = r.F64();
  }
  const int bx = r.U16();
  const int by = r.U16();

  std::array<std::span<const std::uint8_t>, 3> sections;
  const std::array<const char*, 3> names{"bitmap", "depth", "color"};
  std::size_t pos = kContainerHeaderBytes;
  for (int s = 0; s < 3; ++s) {
    if (pos + 4 > bytes.size()) {
      throw ContainerError(std::string("container truncated in the ") + names[s] +
                           " section length");
    }
    std::uint32_t len = 0;
    for (int b = 0; b < 4; ++b) len |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
    pos += 4;
    if (len > bytes.size() - pos) {
      throw ContainerError(std::string("container truncated in the ") + names[s] +
                           " section (" + std::to_string(len) + " bytes declared, " +
                           std::to_string(bytes.size() - pos) + " available)");
    }
    sections[s] = bytes.subspan(pos, len);
    pos += len;
  }
  if (pos + 4 > bytes.size()) throw ContainerError("container truncated in the checksum");
  if (pos + 4 < bytes.size()) {
    throw ContainerError("container lengths do not add up to its size");
  }
  std::uint32_t stored = 0;
  for (int b = 0; b < 4; ++b) stored |= static_cast<std::uint32_t>(bytes[pos + b]) << (8 * b);
  if (Crc32(bytes.first(pos)) != stored) throw ContainerError("container checksum mismatch");

  try {
    parts.m_ab = RigidTransform::FromMatrix(m);
    parts.blocks = BlockSet::FromBitmap(sections[0], bx, by);
  } catch (const Error& e) {
    throw ContainerError(std::string("container: ") + e.what());
  }
  parts.depth.assign(sections[1].begin(), sections[1].end());
  parts.color.assign(sections[2].begin(), sections[2].end());
  if (parts.blocks.empty() != parts.depth.empty() || parts.depth.empty() != parts.color.empty()) {
    throw ContainerError("container sections disagree with the block set");
  }
  return parts;
}

}  // namespace rprr
