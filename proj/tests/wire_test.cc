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

#include "rprr/wire.h"

#include <random>

#include <Eigen/Geometry>

#include "gtest/gtest.h"
#include "rprr/errors.h"

namespace rprr {
namespace {

TEST(WireTest, HeaderLayout) {
  Message m = MakeBlob(MessageType::kContainer, {1, 2, 3}, 7);
  m.sequence = 0x01020304;
  const std::vector<std::uint8_t> frame = EncodeFrame(m);
  const std::vector<std::uint8_t> expected = {
      3, 0, 0, 0,  // body length
      8,           // type
      1,           // version
      0, 0,        // reserved
      4, 3, 2, 1,  // sequence
      7, 0, 0, 0,  // count
      1, 2, 3};
  EXPECT_EQ(frame, expected);
}

TEST(WireTest, SamplesFrameSize) {
  std::vector<QueryRecord> q(250);
  EXPECT_EQ(EncodeFrame(MakeSamples(q)).size(), 1516u);
}

TEST(WireTest, RecordsRoundTrip) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> any(-32768, 32767);
  std::vector<QueryRecord> q(40);
  std::vector<MatchRecord> m(40);
  std::vector<SampleRecord> s(40);
  for (int n = 0; n < 40; ++n) {
    q[n] = {static_cast<std::int16_t>(any(rng)),
            static_cast<std::int16_t>(any(rng)),
            static_cast<std::uint16_t>(any(rng) + 32768)};
    m[n] = {static_cast<std::uint8_t>(n),
            static_cast<std::uint16_t>(any(rng) + 32768),
            {static_cast<std::int16_t>(any(rng)),
             static_cast<std::int16_t>(any(rng))}};
    s[n] = {static_cast<std::uint16_t>(n), static_cast<std::uint16_t>(2 * n),
            static_cast<std::uint16_t>(any(rng) + 32768),
            {static_cast<std::int16_t>(any(rng)),
             static_cast<std::int16_t>(any(rng))}};
  }
  EXPECT_EQ(ParseSamples(DecodeFrame(EncodeFrame(MakeSamples(q)))), q);
  EXPECT_EQ(ParseMatches(DecodeFrame(EncodeFrame(MakeMatches(m)))), m);
  EXPECT_EQ(ParseReferenceSamples(
                DecodeFrame(EncodeFrame(MakeReferenceSamples(s)))),
            s);
  EXPECT_EQ(MakeMatches(m).body.size(), 40u * 7);
  EXPECT_EQ(MakeReferenceSamples(s).body.size(), 40u * 10);
}

TEST(WireTest, PoseReportIsBitExact) {
  const RigidTransform pose(
      Eigen::AngleAxisd(0.3, Eigen::Vector3d(1, 2, 3).normalized())
          .toRotationMatrix(),
      Eigen::Vector3d(0.1, -0.2, 1.0 / 3.0));
  for (bool converged : {true, false}) {
    const Message m = MakePoseReport({pose, 12, converged});
    EXPECT_EQ(m.type, converged ? MessageType::kConverged
                                : MessageType::kPoseUpdate);
    const PoseReport back = ParsePoseReport(DecodeFrame(EncodeFrame(m)));
    EXPECT_TRUE(back.pose == pose);
    EXPECT_EQ(back.iterations, 12u);
    EXPECT_EQ(back.converged, converged);
  }
}

TEST(WireTest, HelloRoundTrip) {
  const Hello h{Role::kB, 0x1122334455667788ull, 99};
  const Hello back = ParseHello(DecodeFrame(EncodeFrame(MakeHello(h))));
  EXPECT_EQ(back.role, Role::kB);
  EXPECT_EQ(back.intrinsics_hash, h.intrinsics_hash);
  EXPECT_EQ(back.seed, 99u);
}

TEST(WireTest, RejectsBadFrames) {
  std::vector<std::uint8_t> frame = EncodeFrame(MakeSamples({}));
  frame[4] = 42;
  EXPECT_THROW(DecodeFrame(frame), ProtocolError);
  frame = EncodeFrame(MakeSamples({}));
  frame[5] = 2;
  EXPECT_THROW(DecodeFrame(frame), ProtocolError);
  frame = EncodeFrame(MakeBlob(MessageType::kContainer, {1, 2}));
  frame.pop_back();
  EXPECT_THROW(DecodeFrame(frame), ProtocolError);
  EXPECT_THROW(ParseFrameHeader(std::vector<std::uint8_t>(15)),
               ProtocolError);
}

TEST(WireTest, CountMismatchIsProtocolError) {
  Message m = MakeSamples(std::vector<QueryRecord>(3));
  m.count = 4;
  EXPECT_THROW(ParseSamples(m), ProtocolError);
}

TEST(WireTest, WrongTypeAndAbort) {
  EXPECT_THROW(ParseSamples(MakeMatches({})), ProtocolError);
  EXPECT_THROW(ParseSamples(MakeAbort({3, "boom"})), SessionAbortError);
  const AbortNotice n = ParseAbort(MakeAbort({1, "no overlap"}));
  EXPECT_EQ(n.reason, 1);
  EXPECT_EQ(n.text, "no overlap");
}

TEST(ByteReaderTest, LittleEndianAndBounds) {
  ByteWriter w;
  w.U16(0x0102);
  w.U32(0x03040506);
  w.U64(0x0708090a0b0c0d0eull);
  w.F64(-2.5);
  const std::vector<std::uint8_t> bytes = w.Take();
  EXPECT_EQ(bytes[0], 0x02);
  EXPECT_EQ(bytes[2], 0x06);
  ByteReader r(bytes);
  EXPECT_EQ(r.U16(), 0x0102);
  EXPECT_EQ(r.U32(), 0x03040506u);
  EXPECT_EQ(r.U64(), 0x0708090a0b0c0d0eull);
  EXPECT_EQ(r.F64(), -2.5);
  r.ExpectEnd();
  EXPECT_THROW(r.U8(), MalformedPayloadError);
}

}  // namespace
}  // namespace rprr
