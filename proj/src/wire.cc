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

#include <bit>
#include <cstring>

#include "rprr/errors.h"

namespace rprr {
namespace {

constexpr std::size_t kQueryBytes = 6;
constexpr std::size_t kMatchBytes = 7;
constexpr std::size_t kSampleBytes = 10;
constexpr std::size_t kPoseBytes = 12 * 8 + 4;

bool KnownType(std::uint8_t t) { return t >= 1 && t <= 9; }

void CheckBody(const Message& m, MessageType type, std::size_t record) {
  ExpectType(m, type);
  if (m.body.size() != record * m.count) {
    throw ProtocolError(std::string(MessageTypeName(type)) +
                        ": body length does not match record count");
  }
}

}  // namespace

const char* MessageTypeName(MessageType type) {
  switch (type) {
    case MessageType::kHello: return "HELLO";
    case MessageType::kSamples: return "SAMPLES";
    case MessageType::kReferenceSamples: return "REFERENCE_SAMPLES";
    case MessageType::kMatches: return "MATCHES";
    case MessageType::kPoseUpdate: return "POSE_UPDATE";
    case MessageType::kConverged: return "CONVERGED";
    case MessageType::kBlockSet: return "BLOCK_SET";
    case MessageType::kContainer: return "CONTAINER";
    case MessageType::kAbort: return "ABORT";
  }
  return "UNKNOWN";
}

std::vector<std::uint8_t> EncodeFrame(const Message& message) {
  if (message.body.size() > kMaxBodyLength) {
    throw ProtocolError("message body exceeds the frame limit");
  }
  ByteWriter w;
  w.data().reserve(message.wire_size());
  w.U32(static_cast<std::uint32_t>(message.body.size()));
  w.U8(static_cast<std::uint8_t>(message.type));
  w.U8(kProtocolVersion);
  w.U16(0);
  w.U32(message.sequence);
  w.U32(message.count);
  w.Bytes(message.body);
  return w.Take();
}

FrameHeader ParseFrameHeader(std::span<const std::uint8_t> header) {
  if (header.size() < kFrameHeaderSize) {
    throw ProtocolError("truncated frame header");
  }
  ByteReader r(header.first(kFrameHeaderSize));
  FrameHeader h;
  h.body_length = r.U32();
  const std::uint8_t type = r.U8();
  const std::uint8_t version = r.U8();
  r.U16();
  h.sequence = r.U32();
  h.count = r.U32();
  if (!KnownType(type)) {
    throw ProtocolError("unknown message type " + std::to_string(type));
  }
  if (version != kProtocolVersion) {
    throw ProtocolError("unsupported protocol version " +
                        std::to_string(version));
  }
  if (h.body_length > kMaxBodyLength) {
    throw ProtocolError("frame body length exceeds the limit");
  }
  h.type = static_cast<MessageType>(type);
  return h;
}

Message DecodeFrame(std::span<const std::uint8_t> frame) {
  const FrameHeader h = ParseFrameHeader(frame);
  if (frame.size() != kFrameHeaderSize + h.body_length) {
    throw ProtocolError("frame length disagrees with its header");
  }
  Message m;
  m.type = h.type;
  m.sequence = h.sequence;
  m.count = h.count;
  m.body.assign(frame.begin() + kFrameHeaderSize, frame.end());
  return m;
}

void ByteWriter::U16(std::uint16_t v) {
  U8(static_cast<std::uint8_t>(v));
  U8(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::U32(std::uint32_t v) {
  U16(static_cast<std::uint16_t>(v));
  U16(static_cast<std::uint16_t>(v >> 16));
}

void ByteWriter::U64(std::uint64_t v) {
  U32(static_cast<std::uint32_t>(v));
  U32(static_cast<std::uint32_t>(v >> 32));
}

void ByteWriter::F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::Bytes(std::span<const std::uint8_t> v) {
  bytes_.insert(bytes_.end(), v.begin(), v.end());
}

void ByteReader::Need(std::size_t n) const {
  if (remaining() < n) {
    throw MalformedPayloadError("unexpected end of payload at byte " +
                                std::to_string(offset_));
  }
}

std::uint8_t ByteReader::U8() {
  Need(1);
  return bytes_[offset_++];
}

std::uint16_t ByteReader::U16() {
  Need(2);
  const std::uint16_t v = static_cast<std::uint16_t>(
      bytes_[offset_] | (bytes_[offset_ + 1] << 8));
  offset_ += 2;
  return v;
}

std::uint32_t ByteReader::U32() {
  const std::uint32_t lo = U16();
  return lo | (static_cast<std::uint32_t>(U16()) << 16);
}

std::uint64_t ByteReader::U64() {
  const std::uint64_t lo = U32();
  return lo | (static_cast<std::uint64_t>(U32()) << 32);
}

double ByteReader::F64() { return std::bit_cast<double>(U64()); }

std::span<const std::uint8_t> ByteReader::Bytes(std::size_t n) {
  Need(n);
  const auto out = bytes_.subspan(offset_, n);
  offset_ += n;
  return out;
}

void ByteReader::ExpectEnd() const {
  if (remaining() != 0) {
    throw MalformedPayloadError("trailing bytes after payload at byte " +
                                std::to_string(offset_));
  }
}

Message MakeHello(const Hello& hello) {
  ByteWriter w;
  w.U8(static_cast<std::uint8_t>(hello.role));
  w.U8(0);
  w.U16(0);
  w.U64(hello.intrinsics_hash);
  w.U64(hello.seed);
  return {MessageType::kHello, 0, 0, w.Take()};
}

Hello ParseHello(const Message& message) {
  ExpectType(message, MessageType::kHello);
  ByteReader r(message.body);
  Hello h;
  const std::uint8_t role = r.U8();
  if (role < 1 || role > 3) throw ProtocolError("HELLO: unknown role");
  h.role = static_cast<Role>(role);
  r.U8();
  r.U16();
  h.intrinsics_hash = r.U64();
  h.seed = r.U64();
  r.ExpectEnd();
  return h;
}

Message MakeSamples(std::span<const QueryRecord> queries) {
  ByteWriter w;
  w.data().reserve(queries.size() * kQueryBytes);
  for (const QueryRecord& q : queries) {
    w.I16(q.i);
    w.I16(q.j);
    w.U16(q.z);
  }
  return {MessageType::kSamples, 0,
          static_cast<std::uint32_t>(queries.size()), w.Take()};
}

std::vector<QueryRecord> ParseSamples(const Message& message) {
  CheckBody(message, MessageType::kSamples, kQueryBytes);
  ByteReader r(message.body);
  std::vector<QueryRecord> out(message.count);
  for (QueryRecord& q : out) {
    q.i = r.I16();
    q.j = r.I16();
    q.z = r.U16();
  }
  return out;
}

Message MakeReferenceSamples(std::span<const SampleRecord> samples) {
  ByteWriter w;
  for (const SampleRecord& s : samples) {
    w.U16(s.i);
    w.U16(s.j);
    w.U16(s.z);
    w.I16(s.normal[0]);
    w.I16(s.normal[1]);
  }
  return {MessageType::kReferenceSamples, 0,
          static_cast<std::uint32_t>(samples.size()), w.Take()};
}

std::vector<SampleRecord> ParseReferenceSamples(const Message& message) {
  CheckBody(message, MessageType::kReferenceSamples, kSampleBytes);
  ByteReader r(message.body);
  std::vector<SampleRecord> out(message.count);
  for (SampleRecord& s : out) {
    s.i = r.U16();
    s.j = r.U16();
    s.z = r.U16();
    s.normal[0] = r.I16();
    s.normal[1] = r.I16();
  }
  return out;
}

Message MakeMatches(std::span<const MatchRecord> matches) {
  ByteWriter w;
  for (const MatchRecord& m : matches) {
    w.U8(m.offset);
    w.U16(m.z);
    w.I16(m.normal[0]);
    w.I16(m.normal[1]);
  }
  return {MessageType::kMatches, 0,
          static_cast<std::uint32_t>(matches.size()), w.Take()};
}

std::vector<MatchRecord> ParseMatches(const Message& message) {
  CheckBody(message, MessageType::kMatches, kMatchBytes);
  ByteReader r(message.body);
  std::vector<MatchRecord> out(message.count);
  for (MatchRecord& m : out) {
    m.offset = r.U8();
    m.z = r.U16();
    m.normal[0] = r.I16();
    m.normal[1] = r.I16();
  }
  return out;
}

Message MakePoseReport(const PoseReport& report) {
  ByteWriter w;
  const Eigen::Matrix4d m = report.pose.matrix();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) w.F64(m(r, c));
  }
  w.U32(report.iterations);
  return {report.converged ? MessageType::kConverged
                           : MessageType::kPoseUpdate,
          0, 0, w.Take()};
}

PoseReport ParsePoseReport(const Message& message) {
  if (message.type != MessageType::kConverged) {
    ExpectType(message, MessageType::kPoseUpdate);
  }
  if (message.body.size() != kPoseBytes) {
    throw ProtocolError("pose report has the wrong length");
  }
  ByteReader r(message.body);
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  for (int row = 0; row < 3; ++row) {
    for (int c = 0; c < 4; ++c) m(row, c) = r.F64();
  }
  PoseReport p;
  try {
    p.pose = RigidTransform::FromMatrix(m);
  } catch (const ValidationError& e) {
    throw ProtocolError(std::string("pose report: ") + e.what());
  }
  p.iterations = r.U32();
  p.converged = message.type == MessageType::kConverged;
  return p;
}

Message MakeAbort(const AbortNotice& notice) {
  ByteWriter w;
  w.U8(notice.reason);
  w.Bytes({reinterpret_cast<const std::uint8_t*>(notice.text.data()),
           notice.text.size()});
  return {MessageType::kAbort, 0, 0, w.Take()};
}

AbortNotice ParseAbort(const Message& message) {
  if (message.type != MessageType::kAbort || message.body.empty()) {
    throw ProtocolError("malformed ABORT message");
  }
  AbortNotice n;
  n.reason = message.body[0];
  n.text.assign(message.body.begin() + 1, message.body.end());
  return n;
}

Message MakeBlob(MessageType type, std::vector<std::uint8_t> body,
                 std::uint32_t count) {
  return {type, 0, count, std::move(body)};
}

void ExpectType(const Message& message, MessageType expected) {
  if (message.type == expected) return;
  if (message.type == MessageType::kAbort) {
    std::string text = "peer aborted";
    if (!message.body.empty()) {
      text += ": " + std::string(message.body.begin() + 1, message.body.end());
    }
    throw SessionAbortError(text);
  }
  throw ProtocolError(std::string("expected ") + MessageTypeName(expected) +
                      ", received " + MessageTypeName(message.type));
}

}  // namespace rprr
