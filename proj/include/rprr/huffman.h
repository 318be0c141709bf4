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

// Bit-level I/O and canonical Huffman codes.

#ifndef RPRR_HUFFMAN_H_
#define RPRR_HUFFMAN_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rprr {

// MSB-first bit packing.
class BitWriter {
 public:
  void Put(std::uint32_t value, int bits);
  void PutBit(bool bit) { Put(bit ? 1u : 0u, 1); }
  // Pads the last byte with zeros.
  std::vector<std::uint8_t> Finish();
  std::size_t bit_count() const { return bytes_.size() * 8 - free_bits_; }

 private:
  std::vector<std::uint8_t> bytes_;
  int free_bits_ = 0;
};

// Reading past the end throws DecodeError with the byte offset.
class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes,
                     std::size_t base_offset = 0)
      : bytes_(bytes), base_offset_(base_offset) {}

  std::uint32_t Get(int bits);
  bool GetBit() { return Get(1) != 0; }
  std::size_t byte_offset() const { return base_offset_ + position_ / 8; }
  // Bits left before the end of the buffer.
  std::size_t remaining() const { return bytes_.size() * 8 - position_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t base_offset_;
  std::size_t position_ = 0;
};

inline constexpr int kMaxCodeLength = 15;

// Code lengths for `frequencies` (0 for absent symbols), limited to
// kMaxCodeLength. A single present symbol gets length 0: it needs no bits.
std::vector<std::uint8_t> HuffmanCodeLengths(
    std::span<const std::uint64_t> frequencies);

// Canonical code built from code lengths.
class CanonicalCode {
 public:
  CanonicalCode() = default;
  // Throws DecodeError when the lengths over-subscribe the code space.
  explicit CanonicalCode(std::vector<std::uint8_t> lengths);
  // A one-symbol alphabet coded with zero bits.
  static CanonicalCode Single(int symbol, int alphabet);
  static CanonicalCode FromFrequencies(
      std::span<const std::uint64_t> frequencies);

  const std::vector<std::uint8_t>& lengths() const { return lengths_; }
  bool present(int symbol) const;
  int single_symbol() const { return single_; }
  bool empty() const { return single_ < 0 && sorted_symbols_.empty(); }

  void Encode(int symbol, BitWriter& out) const;
  int Decode(BitReader& in) const;

 private:
  std::vector<std::uint8_t> lengths_;
  std::vector<std::uint32_t> codes_;
  // Canonical decode tables indexed by code length.
  std::vector<std::uint32_t> first_code_;
  std::vector<std::uint32_t> first_index_;
  std::vector<std::uint32_t> count_;
  std::vector<int> sorted_symbols_;
  int single_ = -1;
};

}  // namespace rprr

#endif  // RPRR_HUFFMAN_H_
