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
#include <span>
#include <string>
#include <vector>

#include "htq/error.hpp"
#include "htq/image.hpp"
#include "htq/quantize.hpp"
#include "htq/transform.hpp"

namespace htq {

inline constexpr int kDefaultAlphaMax = 6;

/// Population standard deviation of each HT channel, measured gain-free on
/// t_j / M (so channel 0 is the segment mean).
struct ChannelStats {
  std::vector<double> sigma;
  std::size_t count = 0;
};

/// Per-channel gain exponents and resolutions. M == alphas.size().
struct BitAllocation {
  int n0 = 8;
  std::vector<int> alphas;
  std::vector<int> bits;

  std::size_t m() const { return alphas.size(); }

  /// N_j = max(N0 - alpha_j, 0).
  static BitAllocation from_alphas(int n0, std::vector<int> alphas) {
    check_bits(n0, 1);
    BitAllocation a;
    a.n0 = n0;
    a.alphas = std::move(alphas);
    a.bits.reserve(a.alphas.size());
    for (int al : a.alphas) a.bits.push_back(std::max(n0 - al, 0));
    a.validate();
    return a;
  }

  /// Explicit per-channel resolutions; a 0 eliminates the channel.
  static BitAllocation with_bits(std::vector<int> alphas, std::vector<int> bits) {
    BitAllocation a;
    a.alphas = std::move(alphas);
    a.bits = std::move(bits);
    a.n0 = a.bits.empty() ? 0 : a.bits.front();
    a.validate();
    return a;
  }

  void validate() const {
    check_order(alphas.size());
    if (bits.size() != alphas.size()) {
      throw Error(ErrorCode::kInvalidArgument, "bits and alphas differ in length");
    }
    for (int al : alphas) {
      if (al < 0) throw Error(ErrorCode::kAlphaNegative, "alpha " + std::to_string(al));
    }
    if (alphas.front() != 0) throw Error(ErrorCode::kInvalidArgument, "alpha_0 must be 0");
    for (int b : bits) check_bits(b);
    if (bits.front() == 0) throw Error(ErrorCode::kBitsOutOfRange, "DC channel cannot be eliminated");
  }

  Rational average_bpp() const { return bpp(bits); }

  friend bool operator==(const BitAllocation&, const BitAllocation&) = default;
};

inline ChannelStats channel_sigma(const ImagePlane& img, std::size_t m) {
  // Unit gains (alpha = log2 M would give beta = 1); we want t_j / M, which
  // is exactly forward_rows with all alphas zero.
  const std::vector<int> zero(m, 0);
  const ChannelPlanes ch = forward_rows(img, m, zero);

  ChannelStats stats;
  stats.count = ch.segments();
  stats.sigma.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto& p = ch.planes[j];
    // Welford keeps the one-pass variance stable on large planes.
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (double v : p) {
      ++n;
      const double d = v - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (v - mean);
    }
    stats.sigma[j] = n ? std::sqrt(std::max(m2, 0.0) / static_cast<double>(n)) : 0.0;
  }
  return stats;
}

/// Gain exponents plus a flag raised when the DC channel has no spread and
/// the ratios are undefined (alphas then fall back to zero).
struct AlphaResult {
  std::vector<int> alphas;
  bool degenerate_dc = false;
};

inline int alpha_from_ratio(double ratio, int alpha_max) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) return 0;
  return std::clamp(static_cast<int>(std::floor(std::log2(ratio))), 0, alpha_max);
}

inline AlphaResult alpha_from_sigmas(const ChannelStats& stats, int alpha_max = kDefaultAlphaMax) {
  AlphaResult r;
  r.alphas.assign(stats.sigma.size(), 0);
  if (stats.sigma.empty() || !(stats.sigma[0] > 0.0)) {
    r.degenerate_dc = true;
    return r;
  }
  for (std::size_t j = 1; j < stats.sigma.size(); ++j) {
    // A channel with no spread at all gets the largest gain allowed.
    r.alphas[j] = stats.sigma[j] > 0.0 ? alpha_from_ratio(stats.sigma[0] / stats.sigma[j], alpha_max)
                                       : alpha_max;
  }
  return r;
}

struct CalibrationResult {
  BitAllocation allocation;
  std::vector<double> mean_ratios;  // sigma_0 / sigma_j averaged over images; [0] is 1
  std::size_t images_used = 0;      // images with a non-degenerate DC channel
  bool degenerate_dc = false;
};

/// Averages sigma_0 / sigma_j in ratio space across images, then applies
/// floor(log2) once. Channels with sigma_j == 0 in an image are skipped for
/// that image; images whose DC sigma is zero contribute nothing.
inline CalibrationResult calibrate_stats(std::span<const ChannelStats> per_image, int n0,
                                         int alpha_max = kDefaultAlphaMax) {
  if (per_image.empty()) throw Error(ErrorCode::kEmptyDataset, "no calibration images");
  const std::size_t m = per_image.front().sigma.size();
  std::vector<double> sum(m, 0.0);
  std::vector<std::size_t> n(m, 0);
  std::size_t used = 0;
  for (const auto& s : per_image) {
    if (s.sigma.size() != m) throw Error(ErrorCode::kInvalidArgument, "channel count differs across images");
    if (!(s.sigma[0] > 0.0)) continue;
    ++used;
    for (std::size_t j = 1; j < m; ++j) {
      if (s.sigma[j] > 0.0) {
        sum[j] += s.sigma[0] / s.sigma[j];
        ++n[j];
      }
    }
  }

  CalibrationResult out;
  out.images_used = used;
  out.degenerate_dc = used == 0;
  out.mean_ratios.assign(m, 0.0);
  std::vector<int> alphas(m, 0);
  if (used > 0) {
    out.mean_ratios[0] = 1.0;
    for (std::size_t j = 1; j < m; ++j) {
      if (n[j] == 0) {
        alphas[j] = alpha_max;
        continue;
      }
      out.mean_ratios[j] = sum[j] / static_cast<double>(n[j]);
      alphas[j] = alpha_from_ratio(out.mean_ratios[j], alpha_max);
    }
  }
  out.allocation = BitAllocation::from_alphas(n0, std::move(alphas));
  return out;
}

inline CalibrationResult calibrate_dataset(std::span<const ImagePlane> images, std::size_t m, int n0,
                                           int alpha_max = kDefaultAlphaMax) {
  if (images.empty()) throw Error(ErrorCode::kEmptyDataset, "no calibration images");
  std::vector<ChannelStats> stats;
  stats.reserve(images.size());
  for (const auto& img : images) stats.push_back(channel_sigma(img, m));
  return calibrate_stats(stats, n0, alpha_max);
}

}  // namespace htq
