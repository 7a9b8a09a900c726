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
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "htq/error.hpp"
#include "htq/quantize.hpp"

namespace htq::power {

inline constexpr double kBoltzmann = 1.38e-23;  // J/K, as used by the reference figures

/// Converter operating point. Defaults: 90 nm CMOS, 50 MS/s, 1 V full scale.
struct AdcParams {
  double fs = 50e6;          // Hz
  double v_ref = 1.0;        // V; full scale is 0 .. v_ref
  double v_eff = 0.1;        // V; (V_GS - V_TH) / 2
  double c_min = 1e-15;      // F; minimum-inverter input capacitance
  double c_unit = 4.8e-15;   // F; SAR unit DAC capacitance
  double temperature = 300;  // K
  double k_b = kBoltzmann;

  void validate() const {
    if (!(fs > 0 && v_ref > 0 && v_eff > 0 && c_min > 0 && c_unit > 0 && temperature > 0 && k_b > 0)) {
      throw Error(ErrorCode::kInvalidArgument, "ADC parameters must be strictly positive");
    }
    if (!(v_eff < v_ref)) throw Error(ErrorCode::kInvalidArgument, "V_eff must be below V_ref");
  }
};

enum class AdcKind { kPipelined, kSar };

inline std::string to_string(AdcKind k) { return k == AdcKind::kPipelined ? "pipelined" : "sar"; }

/// Thermal-noise floor: 48 k T f_s 2^{2N}. Quadruples per extra bit.
inline double sampling_power(int enob, const AdcParams& p = {}) {
  if (enob < 1) throw Error(ErrorCode::kBitsOutOfRange, "ENOB must be >= 1");
  return 48.0 * p.k_b * p.temperature * p.fs * std::ldexp(1.0, 2 * enob);
}

/// Noise-limited pipeline of 1.5-bit stages plus the process-limited
/// switching term:
///   P_pn   = 9 (1 + 2N (V_eff/V_FS) ln 2) P_s
///   P_pipe = P_pn + 2N C_min V_FS^2 f_s (1 + 6N (V_eff/V_FS) ln 2)
inline double pipelined_power(int bits, const AdcParams& p = {}) {
  check_bits(bits, 1);
  p.validate();
  const double n = bits;
  const double vfs = p.v_ref;
  const double ratio = p.v_eff / vfs * std::numbers::ln2;
  const double p_noise = 9.0 * (1.0 + 2.0 * n * ratio) * sampling_power(bits, p);
  return p_noise + 2.0 * n * p.c_min * vfs * vfs * p.fs * (1.0 + 6.0 * n * ratio);
}

/// Capacitive-DAC switching power, f_s * sum_{i=1}^{N-1} 2^{N-2-i} C_u V_ref^2.
/// The last term (i = N-1) is the fractional 2^{-1}.
inline double sar_power(int bits, const AdcParams& p = {}) {
  check_bits(bits, 1);
  p.validate();
  double coeff = 0.0;
  for (int i = 1; i <= bits - 1; ++i) coeff += std::ldexp(1.0, bits - 2 - i);
  return p.fs * coeff * p.c_unit * p.v_ref * p.v_ref;
}

inline double adc_power(AdcKind kind, int bits, const AdcParams& p = {}) {
  return kind == AdcKind::kPipelined ? pipelined_power(bits, p) : sar_power(bits, p);
}

/// Power relative to the same converter kind at 8 bits.
inline double normalized_power(AdcKind kind, int bits, const AdcParams& p = {}) {
  return adc_power(kind, bits, p) / adc_power(kind, 8, p);
}

struct MultiChannelPower {
  double total_normalized = 0.0;
  double per_channel_normalized = 0.0;
  std::vector<double> channel_normalized;
};

/// Sum of per-channel powers normalized to one 8-bit converter; an
/// eliminated channel (N_j = 0) costs nothing.
inline MultiChannelPower multi_channel_power(std::span<const int> bits, AdcKind kind, const AdcParams& p = {}) {
  if (bits.empty()) throw Error(ErrorCode::kInvalidArgument, "no channels");
  MultiChannelPower out;
  for (int n : bits) {
    check_bits(n);
    const double v = n == 0 ? 0.0 : normalized_power(kind, n, p);
    out.channel_normalized.push_back(v);
    out.total_normalized += v;
  }
  out.per_channel_normalized = out.total_normalized / static_cast<double>(bits.size());
  return out;
}

struct IoMemory {
  double io_energy = 0.0;
  double memory = 0.0;
};

/// Transmit energy and storage both scale with stored bits; normalized to 8 BPP.
inline IoMemory io_and_memory_normalized(double bpp) {
  if (!(bpp > 0.0 && bpp <= 8.0)) throw Error(ErrorCode::kInvalidArgument, "bpp must be in (0, 8]");
  return {bpp / 8.0, bpp / 8.0};
}

}  // namespace htq::power
