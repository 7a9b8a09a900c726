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

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "htq/error.hpp"
#include "htq/image.hpp"

namespace htq {

/// PSNR / SSIM constants. Images are normalized, so the peak is 1.0.
struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

inline void check_same_size(const ImagePlane& a, const ImagePlane& b) {
  if (a.width != b.width || a.height != b.height || !a.valid() || !b.valid()) {
    throw Error(ErrorCode::kDimensionMismatch, std::to_string(a.width) + "x" + std::to_string(a.height) +
                                                   " vs " + std::to_string(b.width) + "x" +
                                                   std::to_string(b.height));
  }
}

inline double mse(const ImagePlane& a, const ImagePlane& b) {
  check_same_size(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return a.data.empty() ? 0.0 : acc / static_cast<double>(a.data.size());
}

inline double psnr_from_mse(double m) {
  return m == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / m);
}

/// 10 log10(1 / MSE); +inf when the planes are identical.
inline double psnr(const ImagePlane& a, const ImagePlane& b) { return psnr_from_mse(mse(a, b)); }

/// Color PSNR pools the squared error over every plane.
inline double psnr(const Image& a, const Image& b) {
  if (a.channels() != b.channels()) throw Error(ErrorCode::kDimensionMismatch, "plane count");
  double acc = 0.0;
  for (std::size_t p = 0; p < a.channels(); ++p) acc += mse(a.planes[p], b.planes[p]);
  return psnr_from_mse(a.channels() ? acc / static_cast<double>(a.channels()) : 0.0);
}

inline std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(window));
  const double c = (window - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double x = i - c;
    g[static_cast<std::size_t>(i)] = std::exp(-(x * x) / (2.0 * sigma * sigma));
    sum += g[static_cast<std::size_t>(i)];
  }
  for (double& v : g) v /= sum;
  return g;
}

namespace detail {

// Separable "valid" filtering: only window positions fully inside the plane.
inline std::vector<double> filter_valid(const std::vector<double>& src, std::size_t w, std::size_t h,
                                        const std::vector<double>& taps) {
  const std::size_t k = taps.size();
  const std::size_t ow = w - k + 1, oh = h - k + 1;
  std::vector<double> tmp(ow * h);
  for (std::size_t r = 0; r < h; ++r) {
    const double* row = src.data() + r * w;
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) acc += taps[t] * row[c + t];
      tmp[r * ow + c] = acc;
    }
  }
  std::vector<double> out(ow * oh, 0.0);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t t = 0; t < k; ++t) {
      const double wt = taps[t];
      const double* in = tmp.data() + (r + t) * ow;
      double* o = out.data() + r * ow;
      for (std::size_t c = 0; c < ow; ++c) o[c] += wt * in[c];
    }
  }
  return out;
}

}  // namespace detail

/// Mean local SSIM over every position where an 11x11 Gaussian (sigma 1.5)
/// window fits. Population (weighted) moments, C1 = (K1 L)^2, C2 = (K2 L)^2.
inline double ssim(const ImagePlane& a, const ImagePlane& b, const SsimParams& p = {}) {
  check_same_size(a, b);
  const auto win = static_cast<std::size_t>(p.window);
  if (a.width < win || a.height < win) {
    throw Error(ErrorCode::kImageTooSmall, "SSIM needs both sides >= " + std::to_string(p.window));
  }
  const auto taps = gaussian_taps(p.window, p.sigma);
  const std::size_t w = a.width, h = a.height, n = a.data.size();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a.data[i] * a.data[i];
    bb[i] = b.data[i] * b.data[i];
    ab[i] = a.data[i] * b.data[i];
  }
  const auto mu_a = detail::filter_valid(a.data, w, h, taps);
  const auto mu_b = detail::filter_valid(b.data, w, h, taps);
  const auto e_aa = detail::filter_valid(aa, w, h, taps);
  const auto e_bb = detail::filter_valid(bb, w, h, taps);
  const auto e_ab = detail::filter_valid(ab, w, h, taps);

  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = e_aa[i] - ma * ma;
    const double vb = e_bb[i] - mb * mb;
    const double cov = e_ab[i] - ma * mb;
    acc += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  }
  return acc / static_cast<double>(mu_a.size());
}

/// Color SSIM averages the per-plane scores.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
  if (a.channels() != b.channels() || a.channels() == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "plane count");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.channels(); ++i) acc += ssim(a.planes[i], b.planes[i], p);
  return acc / static_cast<double>(a.channels());
}

struct QualityReport {
  double psnr = 0.0;
  double ssim = 0.0;
  std::vector<double> plane_psnr;
  std::vector<double> plane_ssim;
};

inline QualityReport quality(const Image& ref, const Image& test) {
  QualityReport q;
  q.psnr = psnr(ref, test);
  q.ssim = ssim(ref, test);
  for (std::size_t i = 0; i < ref.channels(); ++i) {
    q.plane_psnr.push_back(psnr(ref.planes[i], test.planes[i]));
    q.plane_ssim.push_back(ssim(ref.planes[i], test.planes[i]));
  }
  return q;
}

}  // namespace htq
