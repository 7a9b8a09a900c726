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

#include "htq/error.hpp"
#include "htq/image.hpp"

namespace htq {

/// Bilinear resize with corner-aligned sampling: output pixel (r, c) samples
/// the source at (r (H-1)/(h-1), c (W-1)/(w-1)) and blends its four
/// nearest neighbours.
inline ImagePlane resize_bilinear(const ImagePlane& in, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0 || in.width == 0 || in.height == 0) {
    throw Error(ErrorCode::kInvalidArgument, "resize to or from an empty image");
  }
  ImagePlane out(out_w, out_h);
  const double sy = out_h > 1 ? static_cast<double>(in.height - 1) / static_cast<double>(out_h - 1) : 0.0;
  const double sx = out_w > 1 ? static_cast<double>(in.width - 1) / static_cast<double>(out_w - 1) : 0.0;
  for (std::size_t r = 0; r < out_h; ++r) {
    const double fy = static_cast<double>(r) * sy;
    const auto y0 = std::min(static_cast<std::size_t>(fy), in.height - 1);
    const std::size_t y1 = std::min(y0 + 1, in.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t c = 0; c < out_w; ++c) {
      const double fx = static_cast<double>(c) * sx;
      const auto x0 = std::min(static_cast<std::size_t>(fx), in.width - 1);
      const std::size_t x1 = std::min(x0 + 1, in.width - 1);
      const double wx = fx - static_cast<double>(x0);
      const double top = in.at(y0, x0) * (1 - wx) + in.at(y0, x1) * wx;
      const double bot = in.at(y1, x0) * (1 - wx) + in.at(y1, x1) * wx;
      out.at(r, c) = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

inline Image resize_bilinear(const Image& in, std::size_t out_w, std::size_t out_h) {
  Image out;
  for (const auto& p : in.planes) out.planes.push_back(resize_bilinear(p, out_w, out_h));
  return out;
}

/// Snaps every value to the nearest 8-bit level, as if the resized image
/// had been stored as 8-bit pixels.
inline void round_to_8bit(Image& img) {
  for (auto& p : img.planes) {
    for (double& v : p.data) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  }
}

}  // namespace htq
