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

// Experiment plumbing shared by the CLI and the acceptance suite:
// BPC-string parsing, the PSNR/SSIM/power sweep and CSV/table emitters.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "htq/calibrate.hpp"
#include "htq/codec.hpp"
#include "htq/error.hpp"
#include "htq/image.hpp"
#include "htq/metrics.hpp"
#include "htq/parallel.hpp"
#include "htq/power.hpp"
#include "htq/quantize.hpp"
#include "htq/resize.hpp"

namespace htq {

inline const std::vector<int> kDefaultAlphas = {0, 3, 2, 3};

/// "8565" -> {8,5,6,5}; "12,9,10,9" -> {12,9,10,9}. The result must have
/// exactly `m` entries, each at most 16.
inline std::vector<int> parse_bpc(const std::string& text, std::size_t m) {
  std::vector<int> bits;
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kInvalidArgument, "bad BPC string '" + text + "': " + why);
  };
  if (text.empty()) fail("empty");
  if (text.find(',') != std::string::npos) {
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); })) {
        fail("non-numeric field");
      }
      if (tok.size() > 2) fail("field too long");
      bits.push_back(std::stoi(tok));
    }
  } else {
    for (unsigned char c : text) {
      if (!std::isdigit(c)) fail("non-digit");
      bits.push_back(c - '0');
    }
  }
  if (bits.size() != m) fail("expected " + std::to_string(m) + " channels");
  for (int b : bits) {
    if (b > kMaxBits) fail("channel above 16 bits");
  }
  return bits;
}

inline std::string bpc_label(const std::vector<int>& bits) {
  const bool wide = std::any_of(bits.begin(), bits.end(), [](int b) { return b > 9; });
  std::string s;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (wide && i) s += ',';
    s += std::to_string(bits[i]);
  }
  return s;
}

/// A sweep column. Uniform BPC strings (8888, 6666, 3333) denote
/// baseline quantization at that depth; anything else is the transform
/// codec with the given per-channel bits.
struct SweepConfig {
  std::string label;
  std::vector<int> bits;
  bool baseline = false;

  static SweepConfig parse(const std::string& label, std::size_t m = 4) {
    SweepConfig c;
    c.bits = parse_bpc(label, m);
    c.label = label;
    c.baseline = std::all_of(c.bits.begin(), c.bits.end(), [&](int b) { return b == c.bits.front(); });
    if (c.baseline) check_bits(c.bits.front(), 1, 8);
    return c;
  }
};

inline const std::vector<std::string> kPaperConfigs = {"8888", "6666", "3333", "8565", "8060", "7060", "7050"};

struct SweepRow {
  std::string image;
  std::size_t size = 0;
  std::string config;
  double bpp = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
  double p_pipe = 0.0;  // normalized per-channel pipelined ADC power
  double p_sar = 0.0;
  double io = 0.0;
  double mem = 0.0;
};

struct NamedImage {
  std::string name;
  Image image;
};

/// Reconstruction of `img` under one sweep configuration.
inline Image process(const Image& img, const SweepConfig& cfg, const std::vector<int>& alphas) {
  if (cfg.baseline) return transcode_baseline(img, cfg.bits.front());
  return decode(encode(img, BitAllocation::with_bits(alphas, cfg.bits)));
}

inline SweepRow evaluate(const NamedImage& src, std::size_t size, const SweepConfig& cfg,
                         const std::vector<int>& alphas, const power::AdcParams& params = {}) {
  SweepRow row;
  row.image = src.name;
  row.size = size;
  row.config = cfg.label;
  const Image rec = process(src.image, cfg, alphas);
  const Image ref = crop_width(src.image, rec.width());
  row.psnr = psnr(ref, rec);
  row.ssim = ssim(ref, rec);
  if (cfg.baseline) {
    const int n = cfg.bits.front();
    row.bpp = n;
    row.p_pipe = power::normalized_power(power::AdcKind::kPipelined, n, params);
    row.p_sar = power::normalized_power(power::AdcKind::kSar, n, params);
  } else {
    row.bpp = bpp(cfg.bits).value();
    row.p_pipe = power::multi_channel_power(cfg.bits, power::AdcKind::kPipelined, params).per_channel_normalized;
    row.p_sar = power::multi_channel_power(cfg.bits, power::AdcKind::kSar, params).per_channel_normalized;
  }
  const auto io = power::io_and_memory_normalized(row.bpp);
  row.io = io.io_energy;
  row.mem = io.memory;
  return row;
}

/// Resizes each image (bilinear, re-rounded to 8-bit) to every size and
/// evaluates every config. Rows come back ordered by (image, size, config)
/// whatever the thread count.
inline std::vector<SweepRow> run_sweep(const std::vector<NamedImage>& images, const std::vector<std::size_t>& sizes,
                                       const std::vector<SweepConfig>& configs, const std::vector<int>& alphas,
                                       const power::AdcParams& params = {}, unsigned threads = 1) {
  if (images.empty()) throw Error(ErrorCode::kEmptyDataset, "sweep needs at least one image");
  std::vector<NamedImage> resized(images.size() * sizes.size());
  parallel_for(resized.size(), threads, [&](std::size_t i) {
    const auto& src = images[i / sizes.size()];
    const std::size_t s = sizes[i % sizes.size()];
    resized[i].name = src.name;
    if (src.image.width() == s && src.image.height() == s) {
      resized[i].image = src.image;
    } else {
      resized[i].image = resize_bilinear(src.image, s, s);
      round_to_8bit(resized[i].image);
    }
  });
  std::vector<SweepRow> rows(resized.size() * configs.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    const std::size_t cell = i / configs.size();
    rows[i] = evaluate(resized[cell], sizes[cell % sizes.size()], configs[i % configs.size()], alphas, params);
  });
  return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "image,size,config,bpp,psnr,ssim,p_pipe,p_sar,io,mem\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.image << ',' << r.size << ',' << r.config << ',' << r.bpp << ',';
    if (std::isinf(r.psnr)) {
      out << "inf";
    } else {
      out << r.psnr;
    }
    out << ',' << r.ssim << ',' << r.p_pipe << ',' << r.p_sar << ',' << r.io << ',' << r.mem << '\n';
  }
}

/// Normalized power of both converter kinds from 8 bits down to 2, in the
/// layout of the classic comparison table (Markdown).
inline void write_power_table(std::ostream& out, const power::AdcParams& params = {}) {
  out << "| Power (norm.) |";
  for (int n = 8; n >= 2; --n) out << ' ' << n << " |";
  out << "\n|---|";
  for (int n = 8; n >= 2; --n) out << "---|";
  out << '\n';
  for (auto kind : {power::AdcKind::kPipelined, power::AdcKind::kSar}) {
    out << (kind == power::AdcKind::kPipelined ? "| P_pipe |" : "| P_sar |");
    for (int n = 8; n >= 2; --n) {
      out << ' ' << std::fixed << std::setprecision(4) << power::normalized_power(kind, n, params) << " |";
    }
    out << '\n';
  }
  out.unsetf(std::ios::floatfield);
}

/// BPC / BPP / per-channel power rows (Markdown).
inline void write_ppc_table(std::ostream& out, const std::vector<std::vector<int>>& configs, power::AdcKind kind,
                            const power::AdcParams& params = {}) {
  out << "| BPC | BPP | P_total | P_pc |\n|---|---|---|---|\n";
  for (const auto& bits : configs) {
    const auto mc = power::multi_channel_power(bits, kind, params);
    out << "| (";
    for (std::size_t i = 0; i < bits.size(); ++i) out << (i ? ", " : "") << bits[i];
    out << ") | " << bpp(bits).value() << " | " << std::fixed << std::setprecision(4) << mc.total_normalized
        << " | " << mc.per_channel_normalized << " |\n";
    out.unsetf(std::ios::floatfield);
  }
}

}  // namespace htq
