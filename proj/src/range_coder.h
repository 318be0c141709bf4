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

// Adaptive binary range coder (11-bit probabilities, carry propagation via a
// cached byte).

#ifndef RPRR_SRC_RANGE_CODER_H_
#define RPRR_SRC_RANGE_CODER_H_

#include <cstdint>
#include <span>
#include <vector>

namespace rprr {

class BitModel {
 public:
  static constexpr int kBits = 11;
  static constexpr std::uint32_t kOne = 1u << kBits;
  static constexpr int kShift = 5;

  std::uint32_t p0 = kOne / 2;

  void Update(int bit) {
    if (bit) {
      p0 -= p0 >> kShift;
    } else {
      p0 += (kOne - p0) >> kShift;
    }
  }
};

class RangeEncoder {
 public:
  void Encode(BitModel& m, int bit) {
    const std::uint32_t bound = (range_ >> BitModel::kBits) * m.p0;
    if (bit) {
      low_ += bound;
      range_ -= bound;
    } else {
      range_ = bound;
    }
    m.Update(bit);
    while (range_ < kTop) {
      range_ <<= 8;
      ShiftLow();
    }
  }

  std::vector<std::uint8_t> Finish() {
    for (int k = 0; k < 5; ++k) ShiftLow();
    // The first emitted byte is always zero.
    out_.erase(out_.begin());
    return std::move(out_);
  }

 private:
  static constexpr std::uint32_t kTop = 1u << 24;

  void ShiftLow() {
    if (static_cast<std::uint32_t>(low_) < 0xff000000u || (low_ >> 32) != 0) {
      const auto carry = static_cast<std::uint8_t>(low_ >> 32);
      std::uint8_t byte = cache_;
      do {
        out_.push_back(static_cast<std::uint8_t>(byte + carry));
        byte = 0xff;
      } while (--pending_ != 0);
      cache_ = static_cast<std::uint8_t>(low_ >> 24);
    }
    ++pending_;
    low_ = (low_ & 0x00ffffffu) << 8;
  }

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xffffffffu;
  std::uint8_t cache_ = 0;
  std::uint64_t pending_ = 1;
  std::vector<std::uint8_t> out_;
};

// Reads past the end of the buffer as zero bytes.
class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    for (int k = 0; k < 4; ++k) code_ = (code_ << 8) | Next();
  }

  int Decode(BitModel& m) {
    const std::uint32_t bound = (range_ >> BitModel::kBits) * m.p0;
    int bit;
    if (code_ < bound) {
      range_ = bound;
      bit = 0;
    } else {
      code_ -= bound;
      range_ -= bound;
      bit = 1;
    }
    m.Update(bit);
    while (range_ < (1u << 24)) {
      range_ <<= 8;
      code_ = (code_ << 8) | Next();
    }
    return bit;
  }

 private:
  std::uint32_t Next() { return pos_ < bytes_.size() ? bytes_[pos_++] : 0u; }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint32_t code_ = 0;
  std::uint32_t range_ = 0xffffffffu;
};

}  // namespace rprr

#endif  // RPRR_SRC_RANGE_CODER_H_
