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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "htq/error.hpp"

namespace htq {

/// One color plane of normalized intensities, row-major. Inputs are 8-bit
/// pixels divided by 255, so values live in [0, 1].
struct ImagePlane {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> data;

  ImagePlane() = default;
  ImagePlane(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), data(w * h, fill) {}

  double& at(std::size_t row, std::size_t col) { return data[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return data[row * width + col]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * width, width}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * width, width}; }

  bool valid() const { return data.size() == width * height; }

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;
};

/// A gray (1 plane) or RGB (3 planes) image. Planes always share dimensions.
struct Image {
  std::vector<ImagePlane> planes;

  Image() = default;
  explicit Image(ImagePlane gray) { planes.push_back(std::move(gray)); }
  explicit Image(std::vector<ImagePlane> p) : planes(std::move(p)) { check(); }

  std::size_t width() const { return planes.empty() ? 0 : planes.front().width; }
  std::size_t height() const { return planes.empty() ? 0 : planes.front().height; }
  std::size_t channels() const { return planes.size(); }

  void check() const {
    for (const auto& p : planes) {
      if (!p.valid() || p.width != width() || p.height != height()) {
        throw Error(ErrorCode::kDimensionMismatch, "color planes disagree in size");
      }
    }
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Drops columns beyond `width`; used to compare against width-clipped
/// reconstructions.
inline ImagePlane crop_width(const ImagePlane& in, std::size_t width) {
  width = std::min(width, in.width);
  ImagePlane out(width, in.height);
  for (std::size_t r = 0; r < in.height; ++r) {
    auto src = in.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(width), out.row(r).begin());
  }
  return out;
}

inline Image crop_width(const Image& in, std::size_t width) {
  Image out;
  for (const auto& p : in.planes) out.planes.push_back(crop_width(p, width));
  return out;
}

}  // namespace htq
