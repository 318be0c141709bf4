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

#include "rprr/huffman.h"

#include <algorithm>
#include <numeric>
#include <queue>

#include "rprr/errors.h"

namespace rprr {

void BitWriter::Put(std::uint32_t value, int bits) {
  for (int b = bits - 1; b >= 0; --b) {
    if (free_bits_ == 0) {
      bytes_.push_back(0);
      free_bits_ = 8;
    }
    --free_bits_;
    if ((value >> b) & 1u) {
      bytes_.back() |= static_cast<std::uint8_t>(1u << free_bits_);
    }
  }
}

std::vector<std::uint8_t> BitWriter::Finish() {
  free_bits_ = 0;
  return std::move(bytes_);
}

std::uint32_t BitReader::Get(int bits) {
  if (remaining() < static_cast<std::size_t>(bits)) {
    throw DecodeError("bit stream ended early", byte_offset());
  }
  std::uint32_t v = 0;
  for (int b = 0; b < bits; ++b) {
    const std::uint8_t byte = bytes_[position_ / 8];
    v = (v << 1) | ((byte >> (7 - position_ % 8)) & 1u);
    ++position_;
  }
  return v;
}

namespace {

std::vector<std::uint8_t> PlainLengths(
    std::span<const std::uint64_t> frequencies) {
  const int n = static_cast<int>(frequencies.size());
  struct Node {
    std::uint64_t weight;
    int id;
  };
  auto heavier = [](const Node& a, const Node& b) {
    return a.weight != b.weight ? a.weight > b.weight : a.id > b.id;
  };
  std::priority_queue<Node, std::vector<Node>, decltype(heavier)> heap(
      heavier);
  std::vector<int> parent;
  parent.reserve(2 * n);
  for (int s = 0; s < n; ++s) {
    parent.push_back(-1);
    if (frequencies[s] > 0) heap.push({frequencies[s], s});
  }
  while (heap.size() > 1) {
    const Node a = heap.top();
    heap.pop();
    const Node b = heap.top();
    heap.pop();
    const int id = static_cast<int>(parent.size());
    parent.push_back(-1);
    parent[a.id] = id;
    parent[b.id] = id;
    heap.push({a.weight + b.weight, id});
  }
  std::vector<std::uint8_t> lengths(n, 0);
  for (int s = 0; s < n; ++s) {
    if (frequencies[s] == 0) continue;
    int depth = 0;
    for (int p = parent[s]; p >= 0; p = parent[p]) ++depth;
    lengths[s] = static_cast<std::uint8_t>(std::min(depth, 255));
  }
  return lengths;
}

}  // namespace

std::vector<std::uint8_t> HuffmanCodeLengths(
    std::span<const std::uint64_t> frequencies) {
  std::vector<std::uint64_t> f(frequencies.begin(), frequencies.end());
  for (;;) {
    std::vector<std::uint8_t> lengths = PlainLengths(f);
    if (*std::max_element(lengths.begin(), lengths.end()) <= kMaxCodeLength) {
      return lengths;
    }
    // Flatten the distribution until the deepest code fits.
    for (auto& v : f) {
      if (v > 0) v = (v + 1) / 2;
    }
  }
}

CanonicalCode::CanonicalCode(std::vector<std::uint8_t> lengths)
    : lengths_(std::move(lengths)) {
  const int n = static_cast<int>(lengths_.size());
  int present_count = 0;
  for (int s = 0; s < n; ++s) {
    if (lengths_[s] > kMaxCodeLength) {
      throw DecodeError("code length exceeds the limit", 0);
    }
    if (lengths_[s] > 0) ++present_count;
  }
  codes_.assign(n, 0);
  count_.assign(kMaxCodeLength + 1, 0);
  first_code_.assign(kMaxCodeLength + 2, 0);
  first_index_.assign(kMaxCodeLength + 2, 0);
  if (present_count == 0) return;
  for (int s = 0; s < n; ++s) ++count_[lengths_[s]];
  count_[0] = 0;
  std::uint32_t code = 0;
  std::uint64_t space = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    code = (code + count_[len - 1]) << 1;
    first_code_[len] = code;
    space += static_cast<std::uint64_t>(count_[len]) << (kMaxCodeLength - len);
  }
  if (space > (1ull << kMaxCodeLength)) {
    throw DecodeError("code lengths over-subscribe the code space", 0);
  }
  std::uint32_t index = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    first_index_[len] = index;
    index += count_[len];
  }
  sorted_symbols_.assign(index, 0);
  std::vector<std::uint32_t> next = first_code_;
  std::vector<std::uint32_t> slot = first_index_;
  for (int s = 0; s < n; ++s) {
    const int len = lengths_[s];
    if (len == 0) continue;
    codes_[s] = next[len]++;
    sorted_symbols_[slot[len]++] = s;
  }
}

CanonicalCode CanonicalCode::Single(int symbol, int alphabet) {
  CanonicalCode c(std::vector<std::uint8_t>(alphabet, 0));
  c.single_ = symbol;
  return c;
}

CanonicalCode CanonicalCode::FromFrequencies(
    std::span<const std::uint64_t> frequencies) {
  int present_count = 0, last = -1;
  for (std::size_t s = 0; s < frequencies.size(); ++s) {
    if (frequencies[s] > 0) {
      ++present_count;
      last = static_cast<int>(s);
    }
  }
  if (present_count == 1) {
    return Single(last, static_cast<int>(frequencies.size()));
  }
  return CanonicalCode(HuffmanCodeLengths(frequencies));
}

bool CanonicalCode::present(int symbol) const {
  if (symbol == single_) return true;
  return symbol >= 0 && symbol < static_cast<int>(lengths_.size()) &&
         lengths_[symbol] > 0;
}

void CanonicalCode::Encode(int symbol, BitWriter& out) const {
  if (single_ >= 0) return;
  out.Put(codes_[symbol], lengths_[symbol]);
}

int CanonicalCode::Decode(BitReader& in) const {
  if (single_ >= 0) return single_;
  std::uint32_t code = 0;
  for (int len = 1; len <= kMaxCodeLength; ++len) {
    code = (code << 1) | in.Get(1);
    if (count_[len] > 0 && code >= first_code_[len] &&
        code - first_code_[len] < count_[len]) {
      return sorted_symbols_[first_index_[len] + (code - first_code_[len])];
    }
  }
  throw DecodeError("invalid Huffman code", in.byte_offset());
}

}  // namespace rprr
