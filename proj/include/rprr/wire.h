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

// Binary messages exchanged between the two sensor roles and the station.
// Every frame is a 16-byte little-endian header followed by the body:
//
//   u32 body_length | u8 type | u8 version | u16 reserved | u32 sequence |
//   u32 count
//
// The layouts of the bodies are listed in docs/wire_format.md.

#ifndef RPRR_WIRE_H_
#define RPRR_WIRE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rprr/geometry.h"
#include "rprr/icp.h"

namespace rprr {

inline constexpr std::size_t kFrameHeaderSize = 16;
inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxBodyLength = 64u << 20;

enum class MessageType : std::uint8_t {
  kHello = 1,
  kSamples = 2,
  kReferenceSamples = 3,
  kMatches = 4,
  kPoseUpdate = 5,
  kConverged = 6,
  kBlockSet = 7,
  kContainer = 8,
  kAbort = 9,
};

const char* MessageTypeName(MessageType type);

struct Message {
  MessageType type = MessageType::kAbort;
  std::uint32_t sequence = 0;
  std::uint32_t count = 0;
  std::vector<std::uint8_t> body;

  std::size_t wire_size() const { return kFrameHeaderSize + body.size(); }
};

struct FrameHeader {
  std::uint32_t body_length = 0;
  MessageType type = MessageType::kAbort;
  std::uint32_t sequence = 0;
  std::uint32_t count = 0;
};

std::vector<std::uint8_t> EncodeFrame(const Message& message);
// Throws ProtocolError on an unknown type, version, or oversized body.
FrameHeader ParseFrameHeader(std::span<const std::uint8_t> header);
Message DecodeFrame(std::span<const std::uint8_t> frame);

class ByteWriter {
 public:
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U16(std::uint16_t v);
  void U32(std::uint32_t v);
  void U64(std::uint64_t v);
  void I16(std::int16_t v) { U16(static_cast<std::uint16_t>(v)); }
  void F64(double v);
  void Bytes(std::span<const std::uint8_t> v);

  std::vector<std::uint8_t>& data() { return bytes_; }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

// Reads past the end fail with MalformedPayloadError naming the offset.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t U8();
  std::uint16_t U16();
  std::uint32_t U32();
  std::uint64_t U64();
  std::int16_t I16() { return static_cast<std::int16_t>(U16()); }
  double F64();
  std::span<const std::uint8_t> Bytes(std::size_t n);

  std::size_t offset() const { return offset_; }
  std::size_t remaining() const { return bytes_.size() - offset_; }
  void ExpectEnd() const;

 private:
  void Need(std::size_t n) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t offset_ = 0;
};

enum class Role : std::uint8_t { kA = 1, kB = 2, kStation = 3 };

struct Hello {
  Role role = Role::kA;
  std::uint64_t intrinsics_hash = 0;
  std::uint64_t seed = 0;
};

struct PoseReport {
  RigidTransform pose;
  std::uint32_t iterations = 0;
  bool converged = false;
};

struct AbortNotice {
  std::uint8_t reason = 0;
  std::string text;
};

Message MakeHello(const Hello& hello);
Hello ParseHello(const Message& message);

Message MakeSamples(std::span<const QueryRecord> queries);
std::vector<QueryRecord> ParseSamples(const Message& message);

Message MakeReferenceSamples(std::span<const SampleRecord> samples);
std::vector<SampleRecord> ParseReferenceSamples(const Message& message);

Message MakeMatches(std::span<const MatchRecord> matches);
std::vector<MatchRecord> ParseMatches(const Message& message);

// kConverged when report.converged, kPoseUpdate otherwise.
Message MakePoseReport(const PoseReport& report);
PoseReport ParsePoseReport(const Message& message);

Message MakeAbort(const AbortNotice& notice);
AbortNotice ParseAbort(const Message& message);

// Opaque body (block bitmaps, containers).
Message MakeBlob(MessageType type, std::vector<std::uint8_t> body,
                 std::uint32_t count = 0);

// Throws ProtocolError when `message` is not of type `expected`; an ABORT
// received instead raises SessionAbortError with the peer's text.
void ExpectType(const Message& message, MessageType expected);

}  // namespace rprr

#endif  // RPRR_WIRE_H_
