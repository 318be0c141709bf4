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
#include <cmath>
#include <set>
#include <random>

#include "gtest/gtest.h"
#include "rprr/errors.h"

namespace rprr {
namespace {

// Optimal prefix-code cost by repeated merging of the two lightest weights.
std::uint64_t OptimalCost(const std::vector<std::uint64_t>& freq) {
  std::multiset<std::uint64_t> w;
  for (auto f : freq) {
    if (f > 0) w.insert(f);
  }
  if (w.size() < 2) return 0;
  std::uint64_t cost = 0;
  while (w.size() > 1) {
    const std::uint64_t a = *w.begin();
    w.erase(w.begin());
    const std::uint64_t b = *w.begin();
    w.erase(w.begin());
    cost += a + b;
    w.insert(a + b);
  }
  return cost;
}

double Kraft(const std::vector<std::uint8_t>& lengths) {
  double sum = 0;
  for (auto l : lengths) {
    if (l > 0) sum += std::ldexp(1.0, -l);
  }
  return sum;
}

TEST(BitIoTest, MsbFirstPacking) {
  BitWriter w;
  w.Put(0b101, 3);
  w.Put(0b11111, 5);
  w.Put(1, 1);
  EXPECT_EQ(w.bit_count(), 9u);
  const auto bytes = w.Finish();
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0b10111111);
  EXPECT_EQ(bytes[1], 0b10000000);
  BitReader r(bytes);
  EXPECT_EQ(r.Get(3), 0b101u);
  EXPECT_EQ(r.Get(5), 0b11111u);
  EXPECT_TRUE(r.GetBit());
  EXPECT_EQ(r.remaining(), 7u);
}

TEST(BitIoTest, ReadingPastEndThrowsWithOffset) {
  const std::vector<std::uint8_t> bytes{0xff};
  BitReader r(bytes, 40);
  r.Get(6);
  try {
    r.Get(3);
    FAIL();
  } catch (const DecodeError& e) {
    EXPECT_EQ(e.offset(), 40u);
  }
}

TEST(HuffmanTest, MatchesOptimalCostWhenUnconstrained) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint64_t> freq(17);
    for (auto& f : freq) f = rng() % 4 == 0 ? 0 : rng() % 1000;
    const auto lengths = HuffmanCodeLengths(freq);
    std::uint64_t cost = 0;
    for (int s = 0; s < 17; ++s) cost += freq[s] * lengths[s];
    if (std::count_if(freq.begin(), freq.end(), [](auto f) { return f > 0; }) >= 2) {
      EXPECT_EQ(cost, OptimalCost(freq)) << trial;
      EXPECT_DOUBLE_EQ(Kraft(lengths), 1.0);
    }
  }
}

TEST(HuffmanTest, LengthLimitHoldsOnFibonacciWeights) {
  // Fibonacci weights force a maximally skewed tree of depth n - 1.
  std::vector<std::uint64_t> freq{1, 1};
  while (freq.size() < 24) freq.push_back(freq[freq.size() - 1] + freq[freq.size() - 2]);
  const auto lengths = HuffmanCodeLengths(freq);
  EXPECT_LE(*std::max_element(lengths.begin(), lengths.end()), kMaxCodeLength);
  EXPECT_LE(Kraft(lengths), 1.0);
  for (std::size_t s = 0; s < freq.size(); ++s) EXPECT_GT(lengths[s], 0);
}

TEST(CanonicalCodeTest, RoundTripsRandomMessages) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> freq(17, 0);
    std::vector<int> message(500);
    std::geometric_distribution<int> geo(0.3);
    for (int& m : message) {
      m = std::min(geo(rng), 16);
      ++freq[m];
    }
    const CanonicalCode code = CanonicalCode::FromFrequencies(freq);
    BitWriter w;
    for (int m : message) code.Encode(m, w);
    const auto bytes = w.Finish();
    BitReader r(bytes);
    for (int m : message) ASSERT_EQ(code.Decode(r), m);
    EXPECT_LT(r.remaining(), 8u);
  }
}

TEST(CanonicalCodeTest, CodesAreCanonical) {
  // Lengths {2,1,3,3} give codes 10, 0, 110, 111.
  const CanonicalCode code({2, 1, 3, 3});
  BitWriter w;
  for (int s : {0, 1, 2, 3}) code.Encode(s, w);
  const auto bytes = w.Finish();
  // 10 0 110 111 -> 1001 1011 1(000 0000)
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0b10011011);
  EXPECT_EQ(bytes[1], 0b10000000);
}

TEST(CanonicalCodeTest, SingleSymbolUsesNoBits) {
  const std::vector<std::uint64_t> freq{0, 0, 7, 0};
  const CanonicalCode code = CanonicalCode::FromFrequencies(freq);
  EXPECT_EQ(code.single_symbol(), 2);
  BitWriter w;
  for (int k = 0; k < 100; ++k) code.Encode(2, w);
  EXPECT_EQ(w.bit_count(), 0u);
  BitReader r({});
  EXPECT_EQ(code.Decode(r), 2);
}

TEST(CanonicalCodeTest, OverSubscribedLengthsAreRejected) {
  EXPECT_THROW(CanonicalCode({1, 1, 1}), DecodeError);
  EXPECT_THROW(CanonicalCode({16, 1}), DecodeError);
}

TEST(CanonicalCodeTest, UnassignedCodewordFailsToDecode) {
  // Lengths {1, 2} leave 11 unassigned.
  const CanonicalCode code({1, 2});
  const std::vector<std::uint8_t> bytes{0xff, 0xff};
  BitReader r(bytes);
  EXPECT_THROW(code.Decode(r), DecodeError);
}

}  // namespace
}  // namespace rprr
