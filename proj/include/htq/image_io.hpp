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

// Image file I/O: 8-bit binary/ASCII PGM and PPM natively; PNG through
// libpng when HTQ_WITH_PNG is defined (the htq_io CMake target does this).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "htq/error.hpp"
#include "htq/image.hpp"

#ifdef HTQ_WITH_PNG
#include <png.h>
#endif

namespace htq::io {

inline std::string lower_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext;
}

inline Image from_interleaved(const std::vector<std::uint8_t>& px, std::size_t w, std::size_t h, std::size_t ch) {
  Image img;
  img.planes.assign(ch, ImagePlane(w, h));
  for (std::size_t i = 0; i < w * h; ++i) {
    for (std::size_t c = 0; c < ch; ++c) img.planes[c].data[i] = px[i * ch + c] / 255.0;
  }
  return img;
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline std::vector<std::uint8_t> to_interleaved(const Image& img) {
  const std::size_t n = img.width() * img.height(), ch = img.channels();
  std::vector<std::uint8_t> px(n * ch);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < ch; ++c) px[i * ch + c] = to_byte(img.planes[c].data[i]);
  }
  return px;
}

// --- PNM -------------------------------------------------------------------

namespace detail {

inline std::size_t read_pnm_int(std::istream& in) {
  int ch = in.get();
  for (;;) {
    while (ch != EOF && std::isspace(ch)) ch = in.get();
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = in.get();
      continue;
    }
    break;
  }
  if (ch == EOF || !std::isdigit(ch)) throw Error(ErrorCode::kUnsupportedFormat, "malformed PNM header");
  std::size_t v = 0;
  while (ch != EOF && std::isdigit(ch)) {
    v = v * 10 + static_cast<std::size_t>(ch - '0');
    ch = in.get();
  }
  return v;  // the single whitespace after the number has been consumed
}

}  // namespace detail

inline Image read_pnm(std::istream& in) {
  char magic[2] = {};
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '3' && magic[1] != '5' && magic[1] != '6')) {
    throw Error(ErrorCode::kUnsupportedFormat, "not a P2/P3/P5/P6 file");
  }
  const bool ascii = magic[1] == '2' || magic[1] == '3';
  const std::size_t ch = (magic[1] == '3' || magic[1] == '6') ? 3 : 1;
  const std::size_t w = detail::read_pnm_int(in);
  const std::size_t h = detail::read_pnm_int(in);
  const std::size_t maxval = detail::read_pnm_int(in);
  if (w == 0 || h == 0) throw Error(ErrorCode::kUnsupportedFormat, "empty PNM");
  if (maxval != 255) throw Error(ErrorCode::kUnsupportedFormat, "only 8-bit (maxval 255) PNM is supported");
  std::vector<std::uint8_t> px(w * h * ch);
  if (ascii) {
    for (auto& p : px) {
      const auto v = detail::read_pnm_int(in);
      if (v > 255) throw Error(ErrorCode::kUnsupportedFormat, "sample above maxval");
      p = static_cast<std::uint8_t>(v);
    }
  } else {
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (!in) throw Error(ErrorCode::kUnsupportedFormat, "PNM raster truncated");
  }
  return from_interleaved(px, w, h, ch);
}

inline void write_pnm(std::ostream& out, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) throw Error(ErrorCode::kUnsupportedFormat, "PNM needs 1 or 3 planes");
  out << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  const auto px = to_interleaved(img);
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

// --- PNG -------------------------------------------------------------------

#ifdef HTQ_WITH_PNG
inline Image read_png(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error(ErrorCode::kUnsupportedFormat, path + ": " + png.message);
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, px.data(), 0, nullptr)) {
    png_image_free(&png);
    throw Error(ErrorCode::kUnsupportedFormat, path + ": " + png.message);
  }
  return from_interleaved(px, png.width, png.height, color ? 3 : 1);
}

inline void write_png(const std::string& path, const Image& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width());
  png.height = static_cast<png_uint_32>(img.height());
  png.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const auto px = to_interleaved(img);
  if (!png_image_write_to_file(&png, path.c_str(), 0, px.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, path + ": " + png.message);
  }
}
#endif

// --- dispatch by extension -------------------------------------------------

inline Image read_image(const std::string& path) {
  const auto ext = lower_extension(path);
  if (ext == "png") {
#ifdef HTQ_WITH_PNG
    return read_png(path);
#else
    throw Error(ErrorCode::kUnsupportedFormat, "built without PNG support");
#endif
  }
  if (ext != "pgm" && ext != "ppm" && ext != "pnm") {
    throw Error(ErrorCode::kUnsupportedFormat, "unsupported image extension: " + path);
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path);
  return read_pnm(f);
}

inline void write_image(const std::string& path, const Image& img) {
  const auto ext = lower_extension(path);
  if (ext == "png") {
#ifdef HTQ_WITH_PNG
    write_png(path, img);
    return;
#else
    throw Error(ErrorCode::kUnsupportedFormat, "built without PNG support");
#endif
  }
  if (ext != "pgm" && ext != "ppm" && ext != "pnm") {
    throw Error(ErrorCode::kUnsupportedFormat, "unsupported image extension: " + path);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  write_pnm(f, img);
  if (!f) throw Error(ErrorCode::kIo, "write failed: " + path);
}

/// Luma (BT.601) for callers that want a single plane.
inline ImagePlane to_gray(const Image& img) {
  if (img.channels() == 1) return img.planes.front();
  ImagePlane g(img.width(), img.height());
  for (std::size_t i = 0; i < g.data.size(); ++i) {
    g.data[i] = 0.299 * img.planes[0].data[i] + 0.587 * img.planes[1].data[i] + 0.114 * img.planes[2].data[i];
  }
  return g;
}

}  // namespace htq::io
