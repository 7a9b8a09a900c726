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

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "htq/bitstream.hpp"
#include "htq/calibrate.hpp"
#include "htq/error.hpp"
#include "htq/image.hpp"
#include "htq/parallel.hpp"
#include "htq/quantize.hpp"
#include "htq/transform.hpp"

namespace htq {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'H', 'T', 'Q', '1'};
inline constexpr std::uint16_t kFormatVersion = 1;

struct CodedHeader {
  std::uint16_t version = kFormatVersion;
  std::uint32_t width = 0;   // source width before clipping to a multiple of M
  std::uint32_t height = 0;
  std::uint8_t color_channels = 1;
  std::uint8_t m = 4;
  std::uint8_t n0 = 8;
  std::vector<std::uint8_t> bits;
  std::vector<std::uint8_t> alphas;

  std::size_t width_segments() const { return m ? width / m : 0; }
  std::size_t segments() const { return width_segments() * height; }

  friend bool operator==(const CodedHeader&, const CodedHeader&) = default;
};

/// Header plus the packed payload: for each color plane, for each HT channel
/// with N_j > 0, segment codes MSB-first in row-major order, zero-padded to a
/// byte boundary at the end of the channel. Bipolar channels are stored in
/// two's complement.
struct CodedImage {
  CodedHeader header;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const CodedImage&, const CodedImage&) = default;
};

inline BitAllocation allocation_of(const CodedHeader& h) {
  return BitAllocation::with_bits(std::vector<int>(h.alphas.begin(), h.alphas.end()),
                                  std::vector<int>(h.bits.begin(), h.bits.end()));
}

inline std::size_t channel_payload_bytes(std::size_t segments, int bits) {
  return (segments * static_cast<std::size_t>(bits) + 7) / 8;
}

inline std::size_t expected_payload_bytes(const CodedHeader& h) {
  std::size_t per_plane = 0;
  for (auto b : h.bits) per_plane += channel_payload_bytes(h.segments(), b);
  return per_plane * h.color_channels;
}

inline void validate_header(const CodedHeader& h) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kHeaderFieldOutOfRange, what); };
  if (h.version != kFormatVersion) bad("version " + std::to_string(h.version));
  if (h.color_channels != 1 && h.color_channels != 3) bad("color_channels");
  if (!is_power_of_two(h.m) || h.m > kMaxOrder) bad("M");
  if (h.width < h.m) bad("width smaller than M");
  if (h.bits.size() != h.m || h.alphas.size() != h.m) bad("per-channel field length");
  if (h.bits[0] == 0) bad("DC channel eliminated");
  for (auto b : h.bits) {
    if (b > kMaxBits) bad("bits " + std::to_string(b));
  }
  if (h.alphas[0] != 0) bad("alpha_0");
  for (auto a : h.alphas) {
    if (a > 30) bad("alpha " + std::to_string(a));
  }
  if (h.n0 > kMaxBits) bad("N0");
}

// ---------------------------------------------------------------------------
// Plane-level pipeline pieces, shared with the ADC simulator.

inline ChannelCodes quantize_planes(const ChannelPlanes& ch, const BitAllocation& alloc) {
  ChannelCodes out;
  out.m = ch.m;
  out.bits = alloc.bits;
  out.codes.resize(ch.m);
  for (std::size_t j = 0; j < ch.m; ++j) {
    out.ranges.push_back(channel_range(j));
    out.codes[j] = quantize_channel(ch.planes[j], alloc.bits[j], channel_range(j));
  }
  return out;
}

/// Dequantize, remove gains, inverse transform and clamp to [0, 1].
inline ImagePlane reconstruct_plane(const ChannelCodes& codes, const BitAllocation& alloc,
                                    std::size_t width_segments, std::size_t height) {
  ChannelPlanes ch;
  ch.m = codes.m;
  ch.width_segments = width_segments;
  ch.height = height;
  ch.gains = channel_gains(alloc.alphas);
  ch.planes.resize(codes.m);
  for (std::size_t j = 0; j < codes.m; ++j) {
    ch.planes[j] = dequantize_channel(codes.codes[j], codes.bits[j], channel_range(j), ch.segments());
  }
  ImagePlane out = inverse_rows(ch);
  for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
  return out;
}

inline void pack_codes(const ChannelCodes& codes, std::vector<std::uint8_t>& payload) {
  BitWriter w(payload);
  for (std::size_t j = 0; j < codes.m; ++j) {
    const int n = codes.bits[j];
    if (n == 0) continue;
    const std::uint32_t flip = codes.ranges[j] == Range::kBipolar ? (std::uint32_t{1} << (n - 1)) : 0u;
    for (auto c : codes.codes[j]) w.write(c ^ flip, n);
    w.align();
  }
}

inline ChannelCodes unpack_codes(BitReader& r, const CodedHeader& h) {
  ChannelCodes out;
  out.m = h.m;
  out.codes.resize(h.m);
  for (std::size_t j = 0; j < h.m; ++j) {
    const int n = h.bits[j];
    out.bits.push_back(n);
    out.ranges.push_back(channel_range(j));
    if (n == 0) continue;
    const std::uint32_t flip = channel_range(j) == Range::kBipolar ? (std::uint32_t{1} << (n - 1)) : 0u;
    auto& dst = out.codes[j];
    dst.resize(h.segments());
    for (auto& c : dst) c = r.read(n) ^ flip;
    r.align();
  }
  return out;
}

inline CodedHeader make_header(const Image& img, const BitAllocation& alloc) {
  CodedHeader h;
  h.width = static_cast<std::uint32_t>(img.width());
  h.height = static_cast<std::uint32_t>(img.height());
  h.color_channels = static_cast<std::uint8_t>(img.channels());
  h.m = static_cast<std::uint8_t>(alloc.m());
  h.n0 = static_cast<std::uint8_t>(alloc.n0);
  for (int b : alloc.bits) h.bits.push_back(static_cast<std::uint8_t>(b));
  for (int a : alloc.alphas) h.alphas.push_back(static_cast<std::uint8_t>(a));
  return h;
}

/// Packs already-quantized planes (one ChannelCodes per color plane).
inline CodedImage assemble(const Image& img, const BitAllocation& alloc, std::span<const ChannelCodes> per_plane) {
  CodedImage out;
  out.header = make_header(img, alloc);
  validate_header(out.header);
  out.payload.reserve(expected_payload_bytes(out.header));
  for (const auto& codes : per_plane) pack_codes(codes, out.payload);
  return out;
}

// ---------------------------------------------------------------------------

/// Transform, gain, quantize and pack. Color planes are coded independently
/// and stored one after another. Output is identical for any thread count.
inline CodedImage encode(const Image& img, const BitAllocation& alloc, unsigned threads = 1) {
  alloc.validate();
  img.check();
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected 1 or 3 color planes");
  }
  if (img.width() < alloc.m()) throw Error(ErrorCode::kWidthTooSmall, "image narrower than M");

  const std::size_t planes = img.channels();
  std::vector<ChannelPlanes> transformed(planes);
  parallel_for(planes, threads, [&](std::size_t p) {
    transformed[p] = forward_rows(img.planes[p], alloc.m(), alloc.alphas);
  });

  std::vector<ChannelCodes> codes(planes);
  for (std::size_t p = 0; p < planes; ++p) {
    codes[p].m = alloc.m();
    codes[p].bits = alloc.bits;
    codes[p].codes.resize(alloc.m());
    for (std::size_t j = 0; j < alloc.m(); ++j) codes[p].ranges.push_back(channel_range(j));
  }
  parallel_for(planes * alloc.m(), threads, [&](std::size_t task) {
    const std::size_t p = task / alloc.m();
    const std::size_t j = task % alloc.m();
    codes[p].codes[j] = quantize_channel(transformed[p].planes[j], alloc.bits[j], channel_range(j));
  });
  return assemble(img, alloc, codes);
}

inline std::vector<ChannelCodes> unpack_all(const CodedImage& coded) {
  validate_header(coded.header);
  const auto& h = coded.header;
  if (coded.payload.size() < expected_payload_bytes(h)) {
    throw Error(ErrorCode::kTruncatedPayload, "payload holds " + std::to_string(coded.payload.size()) +
                                                  " bytes, geometry needs " +
                                                  std::to_string(expected_payload_bytes(h)));
  }
  BitReader r(coded.payload);
  std::vector<ChannelCodes> out;
  for (std::size_t p = 0; p < h.color_channels; ++p) out.push_back(unpack_codes(r, h));
  return out;
}

/// Unpack, dequantize (eliminated channels as 0), reverse gains, inverse
/// transform. Output width is M * floor(width / M), clamped to [0, 1].
inline Image decode(const CodedImage& coded, unsigned threads = 1) {
  const auto planes = unpack_all(coded);
  const auto& h = coded.header;
  const BitAllocation alloc = allocation_of(h);
  Image out;
  out.planes.resize(planes.size());
  parallel_for(planes.size(), threads, [&](std::size_t p) {
    out.planes[p] = reconstruct_plane(planes[p], alloc, h.width_segments(), h.height);
  });
  return out;
}

inline ImagePlane transcode_baseline(const ImagePlane& img, int bits) { return baseline_quantize(img, bits); }
inline Image transcode_baseline(const Image& img, int bits) { return baseline_quantize(img, bits); }

/// Worst-case per-pixel reconstruction error for an allocation whose AC
/// channels stay inside their non-saturating range:
///   (1/M) * sum_j max_abs_error(N_j) / beta_j.
/// Infinite when any channel is eliminated.
inline double pixel_error_bound(const BitAllocation& alloc) {
  const auto gains = channel_gains(alloc.alphas);
  double sum = 0.0;
  for (std::size_t j = 0; j < alloc.m(); ++j) {
    if (alloc.bits[j] == 0) return std::numeric_limits<double>::infinity();
    sum += max_abs_error(alloc.bits[j], channel_range(j)) / gains[j];
  }
  return sum / static_cast<double>(alloc.m());
}

// ---------------------------------------------------------------------------
// Container (.htq) serialization. Layout, all integers little-endian:
//   magic "HTQ1" | u16 version | u32 width | u32 height | u8 color_channels
//   | u8 M | u8 N0 | u8 reserved (0) | u8 bits[M] | u8 alphas[M]
//   | u64 payload_bytes | payload

inline std::vector<std::uint8_t> serialize(const CodedImage& coded) {
  validate_header(coded.header);
  const auto& h = coded.header;
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put_le<std::uint16_t>(out, h.version);
  put_le<std::uint32_t>(out, h.width);
  put_le<std::uint32_t>(out, h.height);
  put_le<std::uint8_t>(out, h.color_channels);
  put_le<std::uint8_t>(out, h.m);
  put_le<std::uint8_t>(out, h.n0);
  put_le<std::uint8_t>(out, 0);
  out.insert(out.end(), h.bits.begin(), h.bits.end());
  out.insert(out.end(), h.alphas.begin(), h.alphas.end());
  put_le<std::uint64_t>(out, coded.payload.size());
  out.insert(out.end(), coded.payload.begin(), coded.payload.end());
  return out;
}

inline CodedImage parse(std::span<const std::uint8_t> bytes) {
  ByteCursor c(bytes);
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "not an HTQ1 container");
  }
  c.take(kMagic.size());
  CodedImage coded;
  auto& h = coded.header;
  h.version = c.get_le<std::uint16_t>();
  h.width = c.get_le<std::uint32_t>();
  h.height = c.get_le<std::uint32_t>();
  h.color_channels = c.get_le<std::uint8_t>();
  h.m = c.get_le<std::uint8_t>();
  h.n0 = c.get_le<std::uint8_t>();
  if (c.get_le<std::uint8_t>() != 0) throw Error(ErrorCode::kHeaderFieldOutOfRange, "reserved byte");
  if (!is_power_of_two(h.m) || h.m > kMaxOrder) throw Error(ErrorCode::kHeaderFieldOutOfRange, "M");
  auto bits = c.take(h.m);
  auto alphas = c.take(h.m);
  h.bits.assign(bits.begin(), bits.end());
  h.alphas.assign(alphas.begin(), alphas.end());
  validate_header(h);
  const auto declared = c.get_le<std::uint64_t>();
  if (declared != expected_payload_bytes(h)) {
    throw Error(ErrorCode::kHeaderFieldOutOfRange, "payload length " + std::to_string(declared) +
                                                       " disagrees with geometry (" +
                                                       std::to_string(expected_payload_bytes(h)) + ")");
  }
  if (c.remaining() < declared) throw Error(ErrorCode::kTruncatedPayload, "payload shorter than declared");
  if (c.remaining() > declared) throw Error(ErrorCode::kHeaderFieldOutOfRange, "trailing bytes after payload");
  auto payload = c.take(static_cast<std::size_t>(declared));
  coded.payload.assign(payload.begin(), payload.end());
  return coded;
}

inline void write_htq(const std::string& path, const CodedImage& coded) {
  const auto bytes = serialize(coded);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path);
}

inline CodedImage read_htq(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse(bytes);
}

}  // namespace htq
