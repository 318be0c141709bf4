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

#include "rprr/session.h"

#include "gtest/gtest.h"
#include "rprr/container.h"
#include "rprr/errors.h"
#include "rprr/redundancy.h"
#include "rprr/synthetic.h"

namespace rprr {
namespace {

constexpr double kDeg = M_PI / 180.0;

Intrinsics Qvga() { return Intrinsics::ScaledVga(320, 240); }

ScenePair Moved(const Intrinsics& k, double yaw, const Eigen::Vector3d& t) {
  return GenerateSyntheticScene(RoomSceneSpec(k, CameraPose(yaw, 0, 0, t)), 1);
}

// Records compared without the timings.
void ExpectSameRecord(const TransmissionRecord& a, const TransmissionRecord& b) {
  EXPECT_EQ(a.icp_messages, b.icp_messages);
  EXPECT_EQ(a.block_coords, b.block_coords);
  EXPECT_EQ(a.container_a, b.container_a);
  EXPECT_EQ(a.container_b, b.container_b);
  EXPECT_EQ(a.depth_bytes, b.depth_bytes);
  EXPECT_EQ(a.color_bytes, b.color_bytes);
  EXPECT_EQ(a.prediction_blocks, b.prediction_blocks);
  EXPECT_EQ(a.validation_blocks, b.validation_blocks);
  EXPECT_EQ(a.payload_blocks, b.payload_blocks);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.converged, b.converged);
  EXPECT_EQ(a.fallback, b.fallback);
}

TEST(SessionTest, IdentityPoseSendsOnlyFraming) {
  const Intrinsics k = Intrinsics::Vga();
  const ScenePair p = GenerateSyntheticScene(RoomSceneSpec(k, RigidTransform()), 1);
  SessionConfig c;
  c.color_quality = 100;
  c.postprocess = false;
  const SessionOutput out = RunSession(p, c);
  const TransmissionRecord& r = out.record;
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_EQ(r.prediction_blocks, 0);
  EXPECT_EQ(r.validation_blocks, 0);
  EXPECT_EQ(r.payload_blocks, 0);
  // Header, three section lengths, the 80x60 bitmap, checksum, frame header.
  EXPECT_EQ(r.container_b, 116u + 12 + 600 + 4 + 16);
  EXPECT_EQ(out.depth, p.z_a);
  EXPECT_EQ(out.color, p.c_a);
  EXPECT_EQ(out.observed_bytes, r.total());
}

TEST(SessionTest, DisjointViewsSendEverything) {
  const Intrinsics k = Qvga();
  SyntheticSceneSpec spec;
  spec.intrinsics = k;
  const Texture tex{{90, 140, 60}, {220, 180, 40}, 0.3};
  spec.primitives.push_back(Primitive::Rectangle({0, 0, 2}, {1, 0, 0}, {0, 1, 0}, 3, 3, tex));
  spec.primitives.push_back(Primitive::Rectangle({0, 0, -2}, {1, 0, 0}, {0, 1, 0}, 3, 3, tex));
  spec.camera_a = RigidTransform();
  spec.camera_b = CameraPose(180 * kDeg, 0, 0, {0, 0, 0});
  const ScenePair p = GenerateSyntheticScene(spec, 1);
  const SessionOutput out = RunSession(p, {});
  const SessionOutput ind = RunIndependent(p, 50);
  const int grid = BlockSet::ForImage(k.width, k.height).grid_size();
  EXPECT_EQ(out.record.payload_blocks, grid);
  EXPECT_EQ(out.record.total(),
            ind.record.total() + out.record.icp_messages + out.record.block_coords);
  EXPECT_EQ(out.color, ind.color);
}

TEST(SessionTest, OverlappingSceneSavesBytes) {
  const ScenePair p = Moved(Intrinsics::Vga(), 4 * kDeg, {0.1, 0, 0});
  SessionConfig c;
  const SessionOutput out = RunSession(p, c);
  const SessionOutput ind = RunIndependent(p, c.color_quality);
  EXPECT_TRUE(out.record.converged);
  EXPECT_FALSE(out.record.fallback);
  EXPECT_GT(out.record.payload_blocks, 0);
  EXPECT_LE(out.record.total(), 0.67 * ind.record.total());
  EXPECT_LT(out.record.total(), ind.record.total());
  EXPECT_GE(Psnr(p.c_b, out.color), 30.0);
}

TEST(SessionTest, ByteAccountingIsExact) {
  const ScenePair p = Moved(Qvga(), -6 * kDeg, {0, 0.05, 0.1});
  for (TransportKind t : {TransportKind::kInProcess, TransportKind::kSocket}) {
    SessionConfig c;
    c.transport = t;
    const SessionOutput out = RunSession(p, c);
    EXPECT_EQ(out.observed_bytes, out.record.total());
    EXPECT_GT(out.record.icp_messages, 0u);
    EXPECT_EQ(out.record.block_coords, 600u / 4 + 16);
    const SessionOutput ind = RunIndependent(p, 50, t);
    EXPECT_EQ(ind.observed_bytes, ind.record.total());
  }
}

TEST(SessionTest, DeterministicAcrossRunsAndTransports) {
  const ScenePair p = Moved(Qvga(), 5 * kDeg, {0.08, 0, 0});
  SessionConfig c;
  const SessionOutput first = RunSession(p, c);
  const SessionOutput again = RunSession(p, c);
  c.transport = TransportKind::kSocket;
  const SessionOutput socket = RunSession(p, c);
  for (const SessionOutput* o : {&again, &socket}) {
    ExpectSameRecord(first.record, o->record);
    EXPECT_TRUE(first.m_ab == o->m_ab);
    EXPECT_EQ(first.depth, o->depth);
    EXPECT_EQ(first.color, o->color);
  }
}

TEST(SessionTest, IndependentScheme) {
  const ScenePair p = Moved(Qvga(), 3 * kDeg, {0, 0, 0});
  const SessionOutput a = RunIndependent(p, 60);
  const SessionOutput b = RunIndependent(p, 60, TransportKind::kSocket);
  EXPECT_EQ(a.record.icp_messages, 0u);
  EXPECT_EQ(a.record.block_coords, 0u);
  EXPECT_EQ(a.record.total(), a.record.container_a + a.record.container_b);
  ExpectSameRecord(a.record, b.record);
  EXPECT_EQ(a.depth, p.z_b);
  EXPECT_EQ(a.record.timings.pose_s, 0.0);
}

TEST(SessionTest, NonConvergenceFallsBackToFullFrames) {
  const ScenePair p = Moved(Qvga(), 6 * kDeg, {0.1, 0, 0});
  SessionConfig c;
  c.icp.max_iterations = 1;
  const SessionOutput out = RunSession(p, c);
  const SessionOutput ind = RunIndependent(p, c.color_quality);
  EXPECT_TRUE(out.record.fallback);
  EXPECT_FALSE(out.record.converged);
  EXPECT_EQ(out.record.block_coords, 0u);
  EXPECT_EQ(out.record.container_b, ind.record.container_b);
  EXPECT_EQ(out.depth, p.z_b);
  EXPECT_EQ(out.color, ind.color);
  EXPECT_EQ(out.observed_bytes, out.record.total());
}

TEST(SessionTest, SwappedRolesMatchASwappedPair) {
  const ScenePair p = Moved(Qvga(), 4 * kDeg, {0.05, 0, 0});
  ScenePair swapped = p;
  std::swap(swapped.z_a, swapped.z_b);
  std::swap(swapped.c_a, swapped.c_b);
  swapped.ground_truth = p.ground_truth->inverse();
  SessionConfig c;
  const SessionOutput direct = RunSession(swapped, c);
  c.swap_roles = true;
  const SessionOutput out = RunSession(p, c);
  EXPECT_TRUE(out.record.converged);
  ExpectSameRecord(out.record, direct.record);
  EXPECT_EQ(out.depth, direct.depth);
  EXPECT_EQ(out.color, direct.color);
  const RigidTransform err = out.m_ab * p.ground_truth.value();
  EXPECT_LT(err.angle(), 0.5 * kDeg);
  EXPECT_LT(err.translation().norm(), 0.01);
}

TEST(SessionTest, TransmittedPixelsAreExactAtLosslessQuality) {
  const ScenePair p = Moved(Qvga(), -5 * kDeg, {0, 0, 0.05});
  SessionConfig c;
  c.color_quality = 100;
  const SessionOutput out = RunSession(p, c);
  ASSERT_GT(out.record.payload_blocks, 0);
  std::size_t sent = 0;
  for (int j = 0; j < 240; ++j) {
    for (int i = 0; i < 320; ++i) {
      if (!out.transmitted[j * 320 + i]) continue;
      ++sent;
      ASSERT_EQ(out.depth.at(i, j), p.z_b.at(i, j));
      ASSERT_EQ(out.color.at(i, j), p.c_b.at(i, j));
    }
  }
  EXPECT_EQ(sent, static_cast<std::size_t>(out.record.payload_blocks) * 64);
}

TEST(SessionTest, IcpGridFactor) {
  SessionConfig c;
  EXPECT_EQ(c.IcpFactor(640), 4);
  EXPECT_EQ(c.IcpFactor(320), 2);
  EXPECT_EQ(c.IcpFactor(160), 1);
  EXPECT_EQ(c.IcpFactor(161), 2);
  c.icp_max_width = 0;
  EXPECT_EQ(c.IcpFactor(640), 1);
}

TEST(SessionTest, ConfigValidation) {
  SessionConfig c;
  c.color_quality = 101;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = {};
  c.empty_threshold = 64;
  EXPECT_THROW(c.Validate(), ValidationError);
  c = {};
  c.icp_max_width = -1;
  EXPECT_THROW(c.Validate(), ValidationError);
  const ScenePair p = Moved(Qvga(), 0, {0, 0, 0});
  EXPECT_THROW(RunIndependent(p, -1), ValidationError);
}

}  // namespace
}  // namespace rprr
