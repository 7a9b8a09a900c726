// Copyright 2026 The HTQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "htq/codec.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "htq/metrics.hpp"
#include "test_util.hpp"

namespace htq {
namespace {

using testing::random_plane;

const std::vector<int> kAlphas = {0, 3, 2, 3};

// Module-by-module composition, written out longhand.
ImagePlane composed_oracle(const ImagePlane& img, const BitAllocation& a) {
  auto ch = forward_rows(img, a.m(), a.alphas);
  for (std::size_t j = 0; j < a.m(); ++j) {
    const auto codes = quantize_channel(ch.planes[j], a.bits[j], channel_range(j));
    ch.planes[j] = dequantize_channel(codes, a.bits[j], channel_range(j), ch.segments());
  }
  auto out = inverse_rows(ch);
  for (auto& v : out.data) v = std::min(1.0, std::max(0.0, v));
  return out;
}

// Payload built from a '0'/'1' string, one channel at a time.
std::vector<std::uint8_t> string_packed(const ImagePlane& img, const BitAllocation& a) {
  const auto ch = forward_rows(img, a.m(), a.alphas);
  std::string bits;
  for (std::size_t j = 0; j < a.m(); ++j) {
    const int n = a.bits[j];
    if (n == 0) continue;
    for (auto code : quantize_channel(ch.planes[j], n, channel_range(j))) {
      if (j > 0) code ^= 1u << (n - 1);
      for (int b = n - 1; b >= 0; --b) bits.push_back((code >> b) & 1 ? '1' : '0');
    }
    while (bits.size() % 8) bits.push_back('0');
  }
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < bits.size(); i += 8) out.push_back(static_cast<std::uint8_t>(std::stoi(bits.substr(i, 8), nullptr, 2)));
  return out;
}

BitAllocation random_allocation(std::mt19937_64& rng, bool allow_zero) {
  std::uniform_int_distribution<int> nb(allow_zero ? 0 : 1, kMaxBits), al(0, 6);
  std::vector<int> alphas = {0, al(rng), al(rng), al(rng)};
  std::vector<int> bits = {std::max(1, nb(rng)), nb(rng), nb(rng), nb(rng)};
  return BitAllocation::with_bits(alphas, bits);
}

TEST(Encode, PayloadSizeFormula) {
  std::mt19937_64 rng(71);
  const Image img(random_plane(rng, 32, 32));
  const auto coded = encode(img, BitAllocation::from_alphas(8, kAlphas));
  EXPECT_EQ(coded.payload.size() * 8, 6144u);
  EXPECT_EQ(serialize(coded).size(), 4 + 2 + 4 + 4 + 4 + 4 + 4 + 8 + 768u);

  const auto elim = encode(img, BitAllocation::with_bits(kAlphas, {8, 0, 6, 0}));
  EXPECT_EQ(elim.payload.size(), 256u * 14 / 8);

  // 7 x 3 segments of 5-bit codes: 105 bits -> 14 bytes per channel.
  const Image odd(random_plane(rng, 30, 3));
  const auto padded = encode(odd, BitAllocation::with_bits(kAlphas, {5, 5, 5, 5}));
  EXPECT_EQ(padded.payload.size(), 4u * 14);
  EXPECT_EQ(expected_payload_bytes(padded.header), padded.payload.size());
}

TEST(Encode, ConstantImageAcCodesAreZero) {
  const Image img(ImagePlane(32, 32, 0.6));
  const auto alloc = BitAllocation::from_alphas(8, kAlphas);
  const auto planes = unpack_all(encode(img, alloc));
  ASSERT_EQ(planes.size(), 1u);
  for (std::size_t j = 1; j < 4; ++j) {
    const auto zero = quantize_value(0.0, alloc.bits[j], Range::kBipolar);
    for (auto c : planes[0].codes[j]) ASSERT_EQ(c, zero);
  }
  // On the wire an analog zero is an all-zero two's-complement field.
  const auto coded = encode(img, alloc);
  for (std::size_t i = 256; i < coded.payload.size(); ++i) ASSERT_EQ(coded.payload[i], 0) << i;
}

TEST(Encode, EliminatedChannelsAbsent) {
  std::mt19937_64 rng(73);
  const auto img = random_plane(rng, 32, 32);
  const auto alloc = BitAllocation::with_bits(kAlphas, {8, 0, 6, 0});
  EXPECT_EQ(encode(Image(img), alloc).payload, string_packed(img, alloc));
  const auto planes = unpack_all(encode(Image(img), alloc));
  EXPECT_TRUE(planes[0].codes[1].empty());
  EXPECT_TRUE(planes[0].codes[3].empty());
  EXPECT_EQ(planes[0].codes[2].size(), 256u);
}

TEST(Encode, BitLayoutMatchesStringOracle) {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = random_plane(rng, testing::random_size(rng, 4, 41), testing::random_size(rng, 1, 9));
    const auto alloc = random_allocation(rng, true);
    ASSERT_EQ(encode(Image(img), alloc).payload, string_packed(img, alloc));
  }
}

TEST(Decode, MatchesComposition) {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 30; ++trial) {
    const auto img = random_plane(rng, 32, 32);
    const auto alloc = trial == 0 ? BitAllocation::from_alphas(8, kAlphas) : random_allocation(rng, true);
    const auto out = decode(encode(Image(img), alloc));
    ASSERT_EQ(out.planes[0], composed_oracle(img, alloc));
  }
}

TEST(Decode, HighRateLimit) {
  // Worst case is 2^-17 from DC plus 2^-16 from each AC channel: 7 * 2^-17.
  std::mt19937_64 rng(89);
  const auto alloc = BitAllocation::with_bits({0, 0, 0, 0}, {16, 16, 16, 16});
  EXPECT_DOUBLE_EQ(pixel_error_bound(alloc), 7 * std::ldexp(1.0, -17));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_plane(rng, 32, 32);
    const auto out = decode(encode(Image(img), alloc));
    for (std::size_t i = 0; i < img.data.size(); ++i) worst = std::max(worst, std::abs(out.planes[0].data[i] - img.data[i]));
  }
  EXPECT_LE(worst, pixel_error_bound(alloc));
  EXPECT_GT(worst, 0.0);
}

TEST(Decode, WithinAnalyticBound) {
  // Unit AC gain keeps |a_j| <= 1/2, so no channel saturates.
  std::mt19937_64 rng(97);
  std::uniform_int_distribution<int> nb(1, kMaxBits);
  for (int trial = 0; trial < 100; ++trial) {
    const auto img = random_plane(rng, 32, 32);
    const auto alloc = BitAllocation::with_bits({0, 0, 0, 0}, {nb(rng), nb(rng), nb(rng), nb(rng)});
    const auto out = decode(encode(Image(img), alloc));
    const double bound = pixel_error_bound(alloc);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
      ASSERT_LE(std::abs(out.planes[0].data[i] - img.data[i]), bound + 1e-12);
    }
  }
}

TEST(Decode, AllZeroPayloadIsDcMidpoint) {
  const auto alloc = BitAllocation::from_alphas(8, kAlphas);
  auto coded = encode(Image(ImagePlane(16, 4, 0.9)), alloc);
  std::fill(coded.payload.begin(), coded.payload.end(), 0);
  const auto out = decode(coded);
  for (double v : out.planes[0].data) EXPECT_DOUBLE_EQ(v, std::ldexp(1.0, -9));
}

TEST(Decode, OutputClampedAndClipped) {
  std::mt19937_64 rng(101);
  const auto img = random_plane(rng, 35, 7);
  const auto out = decode(encode(Image(img), BitAllocation::with_bits(kAlphas, {3, 1, 1, 1})));
  EXPECT_EQ(out.width(), 32u);
  EXPECT_EQ(out.height(), 7u);
  for (double v : out.planes[0].data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Decode, QualityNestsWithN0) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const Image img(testing::smooth_plane(rng, 64, 64));
    double prev = INFINITY;
    for (int n0 : {8, 6, 4}) {
      const auto out = decode(encode(img, BitAllocation::from_alphas(n0, kAlphas)));
      const double p = psnr(crop_width(img, out.width()), out);
      EXPECT_LE(p, prev + 1e-9) << "N0=" << n0;
      prev = p;
    }
  }
}

TEST(Codec, ColorPlanesIndependent) {
  std::mt19937_64 rng(107);
  Image rgb;
  for (int i = 0; i < 3; ++i) rgb.planes.push_back(random_plane(rng, 24, 8));
  const auto alloc = BitAllocation::from_alphas(7, kAlphas);
  const auto coded = encode(rgb, alloc);
  EXPECT_EQ(coded.header.color_channels, 3);
  const auto out = decode(coded);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(out.planes[i], decode(encode(Image(rgb.planes[i]), alloc)).planes[0]);
  }
  Image two;
  two.planes = {rgb.planes[0], rgb.planes[1]};
  EXPECT_THROW(encode(two, alloc), Error);
}

TEST(Codec, DeterministicAcrossThreads) {
  std::mt19937_64 rng(109);
  Image rgb;
  for (int i = 0; i < 3; ++i) rgb.planes.push_back(random_plane(rng, 64, 32));
  const auto alloc = BitAllocation::from_alphas(8, kAlphas);
  const auto ref = serialize(encode(rgb, alloc, 1));
  for (unsigned t : {2u, 3u, 8u}) {
    EXPECT_EQ(serialize(encode(rgb, alloc, t)), ref);
    EXPECT_EQ(decode(parse(ref), t), decode(parse(ref), 1));
  }
}

TEST(Container, RoundTripBitIdentity) {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = random_plane(rng, testing::random_size(rng, 4, 40), testing::random_size(rng, 1, 10));
    const auto coded = encode(Image(img), random_allocation(rng, true));
    const auto bytes = serialize(coded);
    const auto back = parse(bytes);
    ASSERT_EQ(back, coded);
    ASSERT_EQ(serialize(back), bytes);
  }
}

TEST(Container, HeaderLayout) {
  const auto coded = encode(Image(ImagePlane(10, 3, 0.5)), BitAllocation::with_bits(kAlphas, {8, 5, 6, 5}));
  const auto b = serialize(coded);
  const std::vector<std::uint8_t> head = {'H', 'T', 'Q', '1', 1, 0, 10, 0, 0, 0, 3, 0, 0, 0, 1, 4, 8, 0, 8, 5, 6, 5, 0, 3, 2, 3};
  ASSERT_GE(b.size(), head.size() + 8);
  EXPECT_TRUE(std::equal(head.begin(), head.end(), b.begin()));
  std::uint64_t len = 0;
  for (int i = 7; i >= 0; --i) len = (len << 8) | b[head.size() + i];
  EXPECT_EQ(len, coded.payload.size());
  EXPECT_EQ(b.size(), head.size() + 8 + len);
}

ErrorCode parse_error(const std::vector<std::uint8_t>& bytes) {
  try {
    parse(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse accepted corrupt input";
  return ErrorCode::kInvalidArgument;
}

TEST(Container, RejectsCorruption) {
  std::mt19937_64 rng(127);
  const auto bytes = serialize(encode(Image(random_plane(rng, 16, 4)), BitAllocation::from_alphas(8, kAlphas)));

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(parse_error(bad), ErrorCode::kBadMagic);
  EXPECT_EQ(parse_error({'H', 'T'}), ErrorCode::kBadMagic);

  bad = bytes;
  bad.pop_back();
  EXPECT_EQ(parse_error(bad), ErrorCode::kTruncatedPayload);
  EXPECT_EQ(parse_error(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 12)), ErrorCode::kTruncatedPayload);

  bad = bytes;
  bad.push_back(0);
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[4] = 2;  // version
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[17] = 1;  // reserved
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[18] = 17;  // N_0 > 16
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[18] = 0;  // DC eliminated
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[15] = 3;  // M
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);

  bad = bytes;
  bad[26] ^= 1;  // payload length
  EXPECT_EQ(parse_error(bad), ErrorCode::kHeaderFieldOutOfRange);
}

TEST(Container, FileRoundTrip) {
  std::mt19937_64 rng(131);
  const auto coded = encode(Image(random_plane(rng, 20, 6)), BitAllocation::from_alphas(6, kAlphas));
  const auto path = (std::filesystem::temp_directory_path() / "htq_codec_test.htq").string();
  write_htq(path, coded);
  EXPECT_EQ(read_htq(path), coded);
  std::filesystem::remove(path);
  try {
    read_htq(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Baseline, TranscodeLabels) {
  std::mt19937_64 rng(137);
  const Image img(testing::random_8bit_plane(rng, 16, 16));
  for (int n : {8, 6, 3}) EXPECT_EQ(transcode_baseline(img, n).planes[0], baseline_quantize(img.planes[0], n));
}

}  // namespace
}  // namespace htq
