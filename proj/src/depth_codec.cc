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

#include "rprr/depth_codec.h"

#include <bit>
#include <cstdlib>
#include <string>

#include <zlib.h>

#include "rprr/errors.h"
#include "rprr/huffman.h"

namespace rprr {
namespace {

constexpr std::uint8_t kVersion = 1;
constexpr std::uint8_t kPredictorRasterDiff = 1;
constexpr int kAlphabet = 17;  // magnitude classes 0..16
constexpr int kContexts = 5;
constexpr std::uint64_t kMaxTiles = 1u << 20;
constexpr int kTileSamples = kBlockSize * kBlockSize;

int MagnitudeClass(std::uint32_t v) { return static_cast<int>(std::bit_width(v)); }

// Context 0 codes the absolute first sample of a tile; 1..4 bucket the
// class of the previous residual.
int ResidualContext(int previous_class) {
  if (previous_class == 0) return 1;
  if (previous_class <= 2) return 2;
  if (previous_class <= 5) return 3;
  return 4;
}

struct Symbol {
  int context;
  int cls;
  std::int32_t value;  // residual (or absolute first sample)
};

template <typename Fn>
void ForEachSymbol(std::span<const DepthTile> tiles, Fn&& fn) {
  for (const DepthTile& t : tiles) {
    fn(Symbol{0, MagnitudeClass(t[0]), t[0]});
    int previous = 0;
    for (int n = 1; n < kTileSamples; ++n) {
      const std::int32_t r = static_cast<std::int32_t>(t[n]) - t[n - 1];
      const int cls = MagnitudeClass(static_cast<std::uint32_t>(std::abs(r)));
      fn(Symbol{ResidualContext(previous), cls, r});
      previous = cls;
    }
  }
}

void PutVarint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t GetVarint(std::span<const std::uint8_t> in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) throw DecodeError("varint runs past the end", pos);
    const std::uint8_t b = in[pos++];
    v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if ((b & 0x80) == 0) return v;
  }
  throw DecodeError("varint too long", pos);
}

std::uint32_t Crc32(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

void WriteTable(const CanonicalCode& code, BitWriter& out) {
  if (code.single_symbol() >= 0) {
    out.Put(1, 5);
    out.Put(static_cast<std::uint32_t>(code.single_symbol()), 5);
    return;
  }
  int n = 0;
  for (int s = 0; s < kAlphabet; ++s) n += code.lengths()[s] > 0;
  out.Put(static_cast<std::uint32_t>(n), 5);
  for (int s = 0; s < kAlphabet; ++s) {
    if (code.lengths()[s] == 0) continue;
    out.Put(static_cast<std::uint32_t>(s), 5);
    out.Put(code.lengths()[s], 4);
  }
}

CanonicalCode ReadTable(BitReader& in) {
  const std::size_t at = in.byte_offset();
  const int n = static_cast<int>(in.Get(5));
  if (n > kAlphabet) throw DecodeError("table lists too many symbols", at);
  if (n == 0) return CanonicalCode(std::vector<std::uint8_t>(kAlphabet, 0));
  if (n == 1) {
    const int s = static_cast<int>(in.Get(5));
    if (s >= kAlphabet) throw DecodeError("table symbol out of range", at);
    return CanonicalCode::Single(s, kAlphabet);
  }
  std::vector<std::uint8_t> lengths(kAlphabet, 0);
  int last = -1;
  for (int k = 0; k < n; ++k) {
    const int s = static_cast<int>(in.Get(5));
    const int len = static_cast<int>(in.Get(4));
    if (s >= kAlphabet || s <= last || len == 0) {
      throw DecodeError("malformed table entry", at);
    }
    lengths[s] = static_cast<std::uint8_t>(len);
    last = s;
  }
  return CanonicalCode(std::move(lengths));
}

}  // namespace

std::vector<std::uint8_t> EncodeDepth(std::span<const DepthTile> tiles) {
  if (tiles.empty()) throw ValidationError("no depth tiles to encode");
  std::array<std::array<std::uint64_t, kAlphabet>, kContexts> freq{};
  ForEachSymbol(tiles, [&](const Symbol& s) { ++freq[s.context][s.cls]; });
  std::array<CanonicalCode, kContexts> codes;
  for (int c = 0; c < kContexts; ++c) {
    codes[c] = CanonicalCode::FromFrequencies(freq[c]);
  }

  std::vector<std::uint8_t> out;
  out.push_back(static_cast<std::uint8_t>(kVersion << 4 | kPredictorRasterDiff));
  PutVarint(out, tiles.size());
  BitWriter bits;
  for (const CanonicalCode& code : codes) WriteTable(code, bits);
  ForEachSymbol(tiles, [&](const Symbol& s) {
    codes[s.context].Encode(s.cls, bits);
    if (s.cls == 0) return;
    const std::uint32_t magnitude =
        static_cast<std::uint32_t>(std::abs(s.value));
    if (s.context != 0) bits.PutBit(s.value < 0);
    bits.Put(magnitude & ((1u << (s.cls - 1)) - 1), s.cls - 1);
  });
  const std::vector<std::uint8_t> body = bits.Finish();
  out.insert(out.end(), body.begin(), body.end());
  const std::uint32_t crc = Crc32(out);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(crc >> (8 * b)));
  return out;
}

std::vector<DepthTile> DecodeDepth(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6) throw DecodeError("depth stream too short", bytes.size());
  const std::size_t body_end = bytes.size() - 4;
  std::uint32_t stored = 0;
  for (int b = 0; b < 4; ++b) {
    stored |= static_cast<std::uint32_t>(bytes[body_end + b]) << (8 * b);
  }
  if (Crc32(bytes.first(body_end)) != stored) {
    throw DecodeError("depth stream checksum mismatch", body_end);
  }
  if (bytes[0] >> 4 != kVersion) {
    throw DecodeError("unsupported depth stream version", 0);
  }
  if ((bytes[0] & 0x0f) != kPredictorRasterDiff) {
    throw DecodeError("unknown depth predictor", 0);
  }
  std::size_t pos = 1;
  const std::uint64_t count = GetVarint(bytes.first(body_end), pos);
  if (count == 0 || count > kMaxTiles) {
    throw DecodeError("implausible tile count " + std::to_string(count), 1);
  }
  BitReader in(bytes.subspan(pos, body_end - pos), pos);
  std::array<CanonicalCode, kContexts> codes;
  for (CanonicalCode& code : codes) code = ReadTable(in);

  auto read_symbol = [&](int context) {
    const CanonicalCode& code = codes[context];
    if (code.empty()) {
      throw DecodeError("symbol coded with an empty table", in.byte_offset());
    }
    const int cls = code.Decode(in);
    if (cls == 0) return std::int32_t{0};
    const bool negative = context != 0 && in.GetBit();
    const std::uint32_t low = in.Get(cls - 1);
    const std::int32_t magnitude =
        static_cast<std::int32_t>((1u << (cls - 1)) | low);
    return negative ? -magnitude : magnitude;
  };

  std::vector<DepthTile> tiles(count);
  for (DepthTile& t : tiles) {
    const std::int32_t first = read_symbol(0);
    if (first > 0xffff) throw DecodeError("sample out of range", in.byte_offset());
    t[0] = static_cast<std::uint16_t>(first);
    int previous = 0;
    for (int n = 1; n < kTileSamples; ++n) {
      const std::int32_t r = read_symbol(ResidualContext(previous));
      const std::int32_t v = t[n - 1] + r;
      if (v < 0 || v > 0xffff) {
        throw DecodeError("sample out of range", in.byte_offset());
      }
      t[n] = static_cast<std::uint16_t>(v);
      previous = MagnitudeClass(static_cast<std::uint32_t>(std::abs(r)));
    }
  }
  if (in.remaining() >= 8 || (in.remaining() > 0 && in.Get(static_cast<int>(in.remaining())) != 0)) {
    throw DecodeError("trailing data after the last tile", in.byte_offset());
  }
  return tiles;
}

std::vector<DepthTile> FrameTiles(const DepthImage& z) {
  const BlockSet grid = BlockSet::ForImage(z.width(), z.height());
  std::vector<DepthTile> out;
  out.reserve(grid.grid_size());
  for (int by = 0; by < grid.blocks_y(); ++by) {
    for (int bx = 0; bx < grid.blocks_x(); ++bx) {
      DepthTile t{};
      for (int y = 0; y < kBlockSize; ++y) {
        for (int x = 0; x < kBlockSize; ++x) {
          const int i = bx * kBlockSize + x, j = by * kBlockSize + y;
          if (z.contains(i, j)) t[y * kBlockSize + x] = z.at(i, j);
        }
      }
      out.push_back(t);
    }
  }
  return out;
}

DepthImage FrameFromTiles(std::span<const DepthTile> tiles, int width,
                          int height) {
  const BlockSet grid = BlockSet::ForImage(width, height);
  if (static_cast<int>(tiles.size()) != grid.grid_size()) {
    throw DecodeError("tile count does not cover the frame", 0);
  }
  DepthImage z(width, height);
  for (int by = 0; by < grid.blocks_y(); ++by) {
    for (int bx = 0; bx < grid.blocks_x(); ++bx) {
      const DepthTile& t = tiles[by * grid.blocks_x() + bx];
      for (int y = 0; y < kBlockSize; ++y) {
        for (int x = 0; x < kBlockSize; ++x) {
          const int i = bx * kBlockSize + x, j = by * kBlockSize + y;
          if (z.contains(i, j)) z.at(i, j) = t[y * kBlockSize + x];
        }
      }
    }
  }
  return z;
}

std::vector<DepthTile> PayloadDepthTiles(std::span<const PayloadBlock> blocks) {
  std::vector<DepthTile> out;
  out.reserve(blocks.size());
  for (const PayloadBlock& b : blocks) out.push_back(b.depth);
  return out;
}

}  // namespace rprr
