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

#include <random>

#include <Eigen/Geometry>

#include "gtest/gtest.h"
#include "rprr/color_codec.h"
#include "rprr/depth_codec.h"
#include "rprr/errors.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

std::vector<std::uint8_t> RandomBytes(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (auto& b : v) b = static_cast<std::uint8_t>(rng());
  return v;
}

ContainerParts RandomParts(std::mt19937_64& rng) {
  ContainerParts p;
  p.flags = static_cast<std::uint8_t>(rng() & 1);
  p.intrinsics_hash = rng();
  const Eigen::Vector3d axis = Eigen::Vector3d::Random().normalized();
  p.m_ab = RigidTransform(Eigen::AngleAxisd(double(rng() % 100) / 100, axis).toRotationMatrix(),
                          Eigen::Vector3d::Random());
  p.blocks = BlockSet(1 + static_cast<int>(rng() % 90), 1 + static_cast<int>(rng() % 70));
  for (int k = 0; k < 40; ++k) {
    p.blocks.insert({static_cast<int>(rng() % p.blocks.blocks_x()),
                     static_cast<int>(rng() % p.blocks.blocks_y())});
  }
  p.depth = RandomBytes(rng, 1 + rng() % 3000);
  p.color = RandomBytes(rng, 1 + rng() % 3000);
  return p;
}

std::uint32_t ReadU32(std::span<const std::uint8_t> b, std::size_t pos) {
  return b[pos] | b[pos + 1] << 8 | b[pos + 2] << 16 | static_cast<std::uint32_t>(b[pos + 3]) << 24;
}

TEST(ContainerTest, RoundTripsRandomParts) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ContainerParts p = RandomParts(rng);
    const auto bytes = PackContainer(p);
    EXPECT_EQ(bytes.size(), ContainerSize(p));
    EXPECT_EQ(UnpackContainer(bytes), p) << trial;
  }
}

TEST(ContainerTest, VgaSizeAccountingIsExact) {
  std::mt19937_64 rng(12);
  ContainerParts p;
  p.blocks = BlockSet::ForImage(640, 480);
  p.blocks.insert({3, 4});
  p.depth = RandomBytes(rng, 321);
  p.color = RandomBytes(rng, 4567);
  // 116 fixed + 3 x 4 length fields + 600 bitmap + sections + 4 checksum.
  EXPECT_EQ(PackContainer(p).size(), 116u + 12u + 600u + 321u + 4567u + 4u);
}

TEST(ContainerTest, EmptyPayloadCarriesOnlyFraming) {
  ContainerParts p;
  p.blocks = BlockSet::ForImage(640, 480);
  const auto bytes = PackContainer(p);
  EXPECT_EQ(bytes.size(), 116u + 12u + 600u + 4u);
  EXPECT_EQ(UnpackContainer(bytes), p);
}

TEST(ContainerTest, SectionsAreSkippableByLength) {
  std::mt19937_64 rng(13);
  const ContainerParts p = RandomParts(rng);
  const auto bytes = PackContainer(p);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RPRR");
  std::size_t pos = 116;
  pos += 4 + ReadU32(bytes, pos);  // bitmap
  pos += 4 + ReadU32(bytes, pos);  // depth
  const std::uint32_t color_len = ReadU32(bytes, pos);
  ASSERT_EQ(color_len, p.color.size());
  EXPECT_TRUE(std::equal(p.color.begin(), p.color.end(), bytes.begin() + pos + 4));
  EXPECT_EQ(pos + 4 + color_len + 4, bytes.size());
}

TEST(ContainerTest, TruncationNamesTheShortSection) {
  std::mt19937_64 rng(14);
  ContainerParts p = RandomParts(rng);
  const auto bytes = PackContainer(p);
  const std::size_t bitmap_end = 116 + 4 + ReadU32(bytes, 116);
  const std::size_t depth_end = bitmap_end + 4 + p.depth.size();
  auto message = [&](std::size_t n) {
    try {
      UnpackContainer(std::span(bytes).first(n));
    } catch (const ContainerError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message(50).find("header"), std::string::npos);
  EXPECT_NE(message(bitmap_end - 1).find("bitmap"), std::string::npos);
  EXPECT_NE(message(depth_end - 10).find("depth"), std::string::npos);
  EXPECT_NE(message(bytes.size() - 10).find("color"), std::string::npos);
  EXPECT_NE(message(bytes.size() - 2).find("checksum"), std::string::npos);
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    EXPECT_THROW(UnpackContainer(std::span(bytes).first(n)), ContainerError) << n;
  }
}

TEST(ContainerTest, CorruptionIsRejected) {
  std::mt19937_64 rng(15);
  const auto bytes = PackContainer(RandomParts(rng));
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(UnpackContainer(magic), ContainerError);
  auto version = bytes;
  version[4] = 2;
  EXPECT_THROW(UnpackContainer(version), ContainerError);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(UnpackContainer(longer), ContainerError);
  for (int trial = 0; trial < 200; ++trial) {
    auto flipped = bytes;
    flipped[rng() % flipped.size()] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    EXPECT_THROW(UnpackContainer(flipped), ContainerError);
  }
}

TEST(ContainerTest, InconsistentPartsAreRejected) {
  ContainerParts p;
  p.blocks = BlockSet(4, 4);
  p.depth = {1};
  p.color = {2};
  EXPECT_THROW(PackContainer(p), ValidationError);
  p.blocks.insert({1, 1});
  p.color.clear();
  EXPECT_THROW(PackContainer(p), ValidationError);
}

TEST(ContainerTest, DepthIsLosslessThroughTheContainer) {
  const Intrinsics k = Intrinsics::ScaledVga(160, 120);
  for (const SyntheticSceneSpec& spec : StandardSceneSpecs(k)) {
    const ScenePair pair = GenerateSyntheticScene(spec, 2);
    ContainerParts p;
    p.flags = kFlagFullFrame;
    p.intrinsics_hash = k.Hash();
    p.m_ab = *pair.ground_truth;
    p.blocks = BlockSet::ForImage(160, 120);
    for (int by = 0; by < p.blocks.blocks_y(); ++by) {
      for (int bx = 0; bx < p.blocks.blocks_x(); ++bx) p.blocks.insert({bx, by});
    }
    p.depth = EncodeDepth(FrameTiles(pair.z_b));
    p.color = EncodeColor(pair.c_b, 100);
    const ContainerParts back = UnpackContainer(PackContainer(p));
    EXPECT_EQ(FrameFromTiles(DecodeDepth(back.depth), 160, 120).samples(),
              pair.z_b.samples());
    EXPECT_EQ(DecodeColor(back.color), pair.c_b);
    EXPECT_EQ(back.m_ab, p.m_ab);
  }
}

}  // namespace
}  // namespace rprr
