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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "htq/error.hpp"
#include "htq/image.hpp"

namespace htq {

inline constexpr int kMaxBits = 16;

/// Declared analog range of a channel. Unipolar is [0, 1] (DC channel and
/// raw pixels); bipolar is [-1, 1] (gained AC channels).
enum class Range { kUnipolar, kBipolar };

inline void check_bits(int bits, int lo = 0, int hi = kMaxBits) {
  if (bits < lo || bits > hi) {
    throw Error(ErrorCode::kBitsOutOfRange,
                "bits " + std::to_string(bits) + " outside [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
}

// Unipolar: floor over 2^N equal cells, reconstruction at the cell midpoint.
//
// Bipolar: mid-tread. Levels sit at k * 2^{1-N} for
// k in [-2^{N-1}, 2^{N-1} - 1] so analog zero is exactly representable;
// the code is the offset-binary index k + 2^{N-1}. The top level is
// 1 - 2^{1-N}, so +1 saturates there.

inline std::uint32_t quantize_value(double v, int bits, Range range) {
  const double cells = std::ldexp(1.0, bits);
  if (range == Range::kUnipolar) {
    const double u = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint32_t>(std::min(std::floor(u * cells), cells - 1.0));
  }
  const double half = cells / 2.0;
  const double step = 2.0 / cells;
  const double k = std::clamp(std::floor(std::clamp(v, -1.0, 1.0) / step + 0.5), -half, half - 1.0);
  return static_cast<std::uint32_t>(k + half);
}

inline double dequantize_value(std::uint32_t code, int bits, Range range) {
  const double cells = std::ldexp(1.0, bits);
  if (range == Range::kUnipolar) return (static_cast<double>(code) + 0.5) / cells;
  return (static_cast<double>(code) - cells / 2.0) * (2.0 / cells);
}

/// Largest |v - deq(q(v))| for v inside the range. For bipolar channels the
/// bound holds up to 1 - 2^{-N}; the saturated top half-cell can reach
/// 2^{1-N}.
inline double max_abs_error(int bits, Range range) {
  return range == Range::kUnipolar ? std::ldexp(1.0, -bits - 1) : std::ldexp(1.0, -bits);
}

/// Value an eliminated (N = 0) channel reconstructs to.
inline double range_zero(Range) { return 0.0; }

inline std::vector<std::uint32_t> quantize_channel(std::span<const double> values, int bits, Range range) {
  check_bits(bits);
  if (bits == 0) return {};
  std::vector<std::uint32_t> codes(values.size());
  std::transform(values.begin(), values.end(), codes.begin(),
                 [&](double v) { return quantize_value(v, bits, range); });
  return codes;
}

/// `count` is only consulted for eliminated channels, which carry no codes
/// but still reconstruct one value per segment.
inline std::vector<double> dequantize_channel(std::span<const std::uint32_t> codes, int bits, Range range,
                                              std::size_t count) {
  check_bits(bits);
  if (bits == 0) return std::vector<double>(count, range_zero(range));
  const std::uint32_t limit = std::uint32_t{1} << bits;
  std::vector<double> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] >= limit) {
      throw Error(ErrorCode::kCodeOverflow,
                  "code " + std::to_string(codes[i]) + " needs more than " + std::to_string(bits) + " bits");
    }
    out[i] = dequantize_value(codes[i], bits, range);
  }
  return out;
}

inline std::vector<double> dequantize_channel(std::span<const std::uint32_t> codes, int bits, Range range) {
  return dequantize_channel(codes, bits, range, codes.size());
}

/// Channel 0 carries the segment mean and is unipolar; every other HT
/// channel is signed.
inline Range channel_range(std::size_t j) { return j == 0 ? Range::kUnipolar : Range::kBipolar; }

/// Quantized HT channels. Eliminated channels (bits 0) hold no codes.
struct ChannelCodes {
  std::size_t m = 0;
  std::vector<int> bits;
  std::vector<std::vector<std::uint32_t>> codes;
  std::vector<Range> ranges;

  friend bool operator==(const ChannelCodes&, const ChannelCodes&) = default;
};

/// Exact average bits-per-pixel, kept as a reduced fraction.
struct Rational {
  long num = 0;
  long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

inline Rational make_rational(long num, long den) {
  const long g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

inline Rational bpp(std::span<const int> bits) {
  if (bits.empty()) throw Error(ErrorCode::kInvalidArgument, "bpp needs at least one channel");
  const long total = std::accumulate(bits.begin(), bits.end(), 0L);
  return make_rational(total, static_cast<long>(bits.size()));
}

/// Reduced-resolution digitization of raw pixels: each pixel keeps N bits
/// over [0, 1] with the unipolar law. For 8-bit sources this equals
/// dropping 8 - N LSBs and reconstructing at the cell midpoint.
inline ImagePlane baseline_quantize(const ImagePlane& img, int bits) {
  check_bits(bits, 1, 8);
  ImagePlane out(img.width, img.height);
  std::transform(img.data.begin(), img.data.end(), out.data.begin(), [&](double v) {
    return dequantize_value(quantize_value(v, bits, Range::kUnipolar), bits, Range::kUnipolar);
  });
  return out;
}

inline Image baseline_quantize(const Image& img, int bits) {
  Image out;
  for (const auto& p : img.planes) out.planes.push_back(baseline_quantize(p, bits));
  return out;
}

}  // namespace htq
