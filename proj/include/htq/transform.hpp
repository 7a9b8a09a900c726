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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "htq/error.hpp"
#include "htq/image.hpp"

namespace htq {

inline constexpr std::size_t kMaxOrder = 64;

inline bool is_power_of_two(std::size_t m) { return m != 0 && (m & (m - 1)) == 0; }

inline void check_order(std::size_t m) {
  if (!is_power_of_two(m)) {
    throw Error(ErrorCode::kNonPowerOfTwo, "Hadamard order " + std::to_string(m));
  }
  if (m > kMaxOrder) {
    throw Error(ErrorCode::kOrderTooLarge, "Hadamard order " + std::to_string(m) + " > 64");
  }
}

/// Unnormalized Sylvester-ordered Hadamard matrix with entries in {+1, -1}.
/// H * H^T == order * I.
class HadamardMatrix {
 public:
  explicit HadamardMatrix(std::size_t order) : order_(order) {
    check_order(order);
    entries_.assign(order * order, 1);
    // H_{2m} = [[H_m, H_m], [H_m, -H_m]], grown in place from H_1 = [1].
    for (std::size_t m = 1; m < order; m *= 2) {
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
          const std::int8_t v = entries_[r * order + c];
          entries_[r * order + c + m] = v;
          entries_[(r + m) * order + c] = v;
          entries_[(r + m) * order + c + m] = static_cast<std::int8_t>(-v);
        }
      }
    }
  }

  std::size_t order() const { return order_; }
  int operator()(std::size_t r, std::size_t c) const { return entries_[r * order_ + c]; }
  std::span<const std::int8_t> row(std::size_t r) const { return {entries_.data() + r * order_, order_}; }

  friend bool operator==(const HadamardMatrix&, const HadamardMatrix&) = default;

 private:
  std::size_t order_;
  std::vector<std::int8_t> entries_;
};

inline HadamardMatrix hadamard_matrix(std::size_t order) { return HadamardMatrix(order); }

/// In-place fast Walsh-Hadamard butterfly, Sylvester (natural) ordering,
/// unnormalized: x <- H_M x.
inline void fwht_inplace(std::span<double> x) {
  const std::size_t n = x.size();
  for (std::size_t len = 1; len < n; len *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * len) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = x[j];
        const double b = x[j + len];
        x[j] = a + b;
        x[j + len] = a - b;
      }
    }
  }
}

/// Analog gain applied to HT channel j: beta_j = 2^alpha_j / M.
inline double channel_gain(int alpha, std::size_t m) {
  return std::ldexp(1.0, alpha) / static_cast<double>(m);
}

/// Analog channel values of a row-transformed plane. Plane j holds
/// a_j = beta_j * (h_j . segment) for every length-M segment, in row-major
/// segment order (height rows of width_segments entries).
struct ChannelPlanes {
  std::size_t m = 0;
  std::size_t width_segments = 0;
  std::size_t height = 0;
  std::vector<std::vector<double>> planes;
  std::vector<double> gains;

  std::size_t segments() const { return width_segments * height; }
};

inline std::vector<double> channel_gains(std::span<const int> alphas) {
  std::vector<double> gains;
  gains.reserve(alphas.size());
  for (int a : alphas) {
    if (a < 0) throw Error(ErrorCode::kAlphaNegative, "alpha " + std::to_string(a));
    gains.push_back(channel_gain(a, alphas.size()));
  }
  return gains;
}

/// Forward 1-D row transform. The width is clipped down to a multiple of M;
/// heights are untouched.
inline ChannelPlanes forward_rows(const ImagePlane& img, std::size_t m, std::span<const int> alphas) {
  check_order(m);
  if (alphas.size() != m) {
    throw Error(ErrorCode::kInvalidArgument, "need one alpha per channel");
  }
  if (img.width < m) {
    throw Error(ErrorCode::kWidthTooSmall,
                "width " + std::to_string(img.width) + " < M " + std::to_string(m));
  }
  if (!img.valid()) throw Error(ErrorCode::kDimensionMismatch, "plane data size");

  ChannelPlanes out;
  out.m = m;
  out.width_segments = img.width / m;
  out.height = img.height;
  out.gains = channel_gains(alphas);
  out.planes.assign(m, std::vector<double>(out.segments()));

  std::vector<double> seg(m);
  for (std::size_t r = 0; r < img.height; ++r) {
    auto row = img.row(r);
    for (std::size_t s = 0; s < out.width_segments; ++s) {
      std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(s * m), m, seg.begin());
      fwht_inplace(seg);
      const std::size_t idx = r * out.width_segments + s;
      for (std::size_t j = 0; j < m; ++j) out.planes[j][idx] = out.gains[j] * seg[j];
    }
  }
  return out;
}

/// Inverse row transform: t_j = a_j / beta_j, x = (1/M) H^T t.
inline ImagePlane inverse_rows(const ChannelPlanes& ch) {
  check_order(ch.m);
  if (ch.planes.size() != ch.m || ch.gains.size() != ch.m) {
    throw Error(ErrorCode::kInvalidArgument, "channel count mismatch");
  }
  for (double g : ch.gains) {
    if (!(g > 0.0)) throw Error(ErrorCode::kZeroGain, "channel gain must be positive");
  }
  for (const auto& p : ch.planes) {
    if (p.size() != ch.segments()) throw Error(ErrorCode::kDimensionMismatch, "channel plane size");
  }

  const std::size_t m = ch.m;
  ImagePlane out(m * ch.width_segments, ch.height);
  std::vector<double> seg(m);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t r = 0; r < ch.height; ++r) {
    auto row = out.row(r);
    for (std::size_t s = 0; s < ch.width_segments; ++s) {
      const std::size_t idx = r * ch.width_segments + s;
      for (std::size_t j = 0; j < m; ++j) seg[j] = ch.planes[j][idx] / ch.gains[j];
      // Sylvester H is symmetric, so H^T t is the same butterfly.
      fwht_inplace(seg);
      for (std::size_t i = 0; i < m; ++i) row[s * m + i] = seg[i] * inv_m;
    }
  }
  return out;
}

}  // namespace htq
