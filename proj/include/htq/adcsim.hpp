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

// Behavioral model of the four-channel converter whose first pipeline stage
// is a 1.5-bit MDAC with the 4-point Hadamard transform embedded in its
// switched-capacitor sampling network. Each channel j:
//
//   sub-ADC   v = beta_j (h_j . x), two comparators at +-V_ref/4 -> k
//   MDAC      V_res = 2 v - k V_ref          (by charge conservation)
//   backend   ideal (N_j - 1)-bit quantizer of V_res over [-V_ref, V_ref]
//   digital   v_hat = (k V_ref + V_res_hat) / 2, re-coded to N_j bits
//
// Non-idealities: per-capacitor multiplicative mismatch and finite op-amp
// DC gain (static closed-loop error through the feedback factor).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
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
#include "htq/transform.hpp"

namespace htq::adc {

inline constexpr std::size_t kPoints = 4;
inline constexpr double kInfiniteGain = std::numeric_limits<double>::infinity();

/// Multiplicative deviations (C_actual = C_nominal * (1 + eps)).
struct CapMismatch {
  std::array<double, kPoints> mdac{};    // sampling caps, one per input pixel
  double reference = 0.0;                // AC channels: reference-injection cap
  double feedback = 0.0;
  std::array<double, kPoints> subadc{};  // comparator sampling network
};

struct EhtCircuit {
  std::size_t channel = 0;        // j in 0..3
  int alpha = 0;                  // beta_j = 2^alpha / 4
  double cs = 50e-15;             // F, unit sampling capacitance
  CapMismatch mismatch;
  double opamp_gain_db = kInfiniteGain;
  double v_ref = 1.0;
  int backend_bits = 7;           // N_j - 1

  double beta() const { return channel_gain(alpha, kPoints); }

  /// MDAC sampling caps: C_s for channel 0, (1 + P_j) C_s = 2 beta_j C_s otherwise.
  double mdac_cap(std::size_t i) const {
    const double nominal = channel == 0 ? cs : 2.0 * beta() * cs;
    return nominal * (1.0 + mismatch.mdac[i]);
  }
  double reference_cap() const { return cs * (1.0 + mismatch.reference); }
  /// C_f = 2 C_s for channel 0, C_s otherwise.
  double feedback_cap() const { return (channel == 0 ? 2.0 * cs : cs) * (1.0 + mismatch.feedback); }
  /// Sub-ADC caps (1 + Q_j) C_s = 4 beta_j C_s.
  double subadc_cap(std::size_t i) const { return 4.0 * beta() * cs * (1.0 + mismatch.subadc[i]); }

  /// Sum of every capacitor on the summing node during amplification.
  double connected_sampling_cap() const {
    double c = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) c += mdac_cap(i);
    return channel == 0 ? c : c + reference_cap();
  }

  double feedback_factor() const {
    const double cf = feedback_cap();
    return cf / (cf + connected_sampling_cap());
  }

  /// A f / (1 + A f); exactly 1 for an infinite-gain op-amp.
  double closed_loop_factor() const {
    if (std::isinf(opamp_gain_db)) return 1.0;
    const double af = std::pow(10.0, opamp_gain_db / 20.0) * feedback_factor();
    return af / (1.0 + af);
  }
};

inline void check_channel(const EhtCircuit& c) {
  if (c.channel >= kPoints) throw Error(ErrorCode::kInvalidArgument, "EHT channel index must be 0..3");
  if (c.channel == 0 && c.alpha != 0) throw Error(ErrorCode::kInvalidArgument, "channel 0 has unit gain");
  if (c.alpha < 0) throw Error(ErrorCode::kAlphaNegative, "alpha " + std::to_string(c.alpha));
}

/// Sign of pixel i in Hadamard row j (Sylvester order).
inline int hadamard_sign(std::size_t j, std::size_t i) {
  return (std::popcount(j & i) & 1) ? -1 : 1;
}

using Segment = std::array<double, kPoints>;

/// Comparator-node value: the mismatch-weighted, gained transform
/// sum_i h_ji x_i (1 + Q_j) C_s (1 + eps_i) / (4 C_s). Ideal caps give
/// beta_j (h_j . x).
inline double subadc_input(const Segment& x, const EhtCircuit& c) {
  double q = 0.0;
  for (std::size_t i = 0; i < kPoints; ++i) q += hadamard_sign(c.channel, i) * x[i] * c.subadc_cap(i);
  return q / (static_cast<double>(kPoints) * c.cs);
}

inline int subadc_decide(const Segment& x, const EhtCircuit& c) {
  const double v = subadc_input(x, c);
  const double th = c.v_ref / 4.0;
  if (v > th) return 1;
  if (v < -th) return -1;
  return 0;
}

struct StageOutput {
  int k = 0;
  double v_res = 0.0;
};

/// Residue from charge conservation with the actual capacitor values.
///   channel 0:  (sum_i C_i x_i - k V_ref (C_0 + C_1)) / C_f
///   channel j:  (sum_i h_ji C_i x_i - k V_ref C_ref) / C_f
/// then scaled by the finite-gain factor.
/// `residue_noise` (volts) is added before the op-amp gain error; it is the
/// hook for optional thermal noise and 0 otherwise.
inline StageOutput eht_stage(const Segment& x, const EhtCircuit& c, double residue_noise = 0.0) {
  StageOutput out;
  out.k = subadc_decide(x, c);
  double q = 0.0;
  for (std::size_t i = 0; i < kPoints; ++i) q += hadamard_sign(c.channel, i) * c.mdac_cap(i) * x[i];
  // Channel 0 injects the reference through sampling caps 0 and 1.
  const double c_ref = c.channel == 0 ? c.mdac_cap(0) + c.mdac_cap(1) : c.reference_cap();
  q -= out.k * c.v_ref * c_ref;
  out.v_res = (q / c.feedback_cap() + residue_noise) * c.closed_loop_factor();
  return out;
}

/// Ideal uniform backend over [-V_ref, V_ref], mid-tread (same law as the
/// bipolar channel quantizer). Zero bits resolve nothing and return 0.
inline double backend_quantize(double v_res, int bits, double v_ref) {
  if (bits < 0) throw Error(ErrorCode::kBackendBitsNegative, "backend bits " + std::to_string(bits));
  if (bits == 0) return 0.0;
  const auto code = quantize_value(v_res / v_ref, bits, Range::kBipolar);
  return dequantize_value(code, bits, Range::kBipolar) * v_ref;
}

struct DigitizedSample {
  StageOutput stage;
  double v_hat = 0.0;                 // stage-corrected estimate of beta_j (h_j . x), volts
  std::optional<std::uint32_t> code;  // empty when the channel is eliminated
};

/// Stage + ideal backend + digital recombination. `bits` is the channel's
/// output resolution N_j; the circuit's backend must resolve N_j - 1 bits.
inline DigitizedSample pipeline_digitize(const Segment& x, const EhtCircuit& c, int bits,
                                         double residue_noise = 0.0) {
  check_bits(bits);
  if (c.backend_bits < 0) throw Error(ErrorCode::kBackendBitsNegative, "backend bits " + std::to_string(c.backend_bits));
  DigitizedSample s;
  s.stage = eht_stage(x, c, residue_noise);
  s.v_hat = (s.stage.k * c.v_ref + backend_quantize(s.stage.v_res, c.backend_bits, c.v_ref)) / 2.0;
  if (bits > 0) s.code = quantize_value(s.v_hat / c.v_ref, bits, channel_range(c.channel));
  return s;
}

inline DigitizedSample pipeline_digitize(const Segment& x, const EhtCircuit& c) {
  return pipeline_digitize(x, c, c.backend_bits + 1);
}

/// Output-referred rms kT/C noise of one stage: the sampled input noise
/// sqrt(kT / sum C_s) amplified by the nominal stage gain of 2.
inline double thermal_noise_rms(const EhtCircuit& c, double temperature = 300.0) {
  return 2.0 * std::sqrt(power::kBoltzmann * temperature / c.connected_sampling_cap());
}

/// One ideal circuit per HT channel, backends sized from the allocation.
inline std::vector<EhtCircuit> ideal_circuits(const BitAllocation& alloc, double opamp_gain_db = kInfiniteGain) {
  if (alloc.m() != kPoints) throw Error(ErrorCode::kInvalidArgument, "the EHT stage is a 4-point design");
  std::vector<EhtCircuit> out(kPoints);
  for (std::size_t j = 0; j < kPoints; ++j) {
    out[j].channel = j;
    out[j].alpha = alloc.alphas[j];
    out[j].backend_bits = std::max(alloc.bits[j] - 1, 0);
    out[j].opamp_gain_db = opamp_gain_db;
  }
  return out;
}

/// Pushes every length-4 row segment through each active channel's stage
/// and backend. The result is a regular container decodable by `decode`.
/// `noise_rng`, when given, adds thermal noise to every residue.
inline CodedImage digitize_image(const Image& img, const BitAllocation& alloc, std::span<const EhtCircuit> circuits,
                                 std::mt19937_64* noise_rng = nullptr) {
  alloc.validate();
  img.check();
  if (alloc.m() != kPoints) throw Error(ErrorCode::kInvalidArgument, "the EHT stage is a 4-point design");
  if (circuits.size() != kPoints) throw Error(ErrorCode::kInvalidArgument, "need one circuit per channel");
  if (img.width() < kPoints) throw Error(ErrorCode::kWidthTooSmall, "image narrower than 4");
  for (std::size_t j = 0; j < kPoints; ++j) {
    check_channel(circuits[j]);
    if (circuits[j].channel != j || circuits[j].alpha != alloc.alphas[j]) {
      throw Error(ErrorCode::kInvalidArgument, "circuit " + std::to_string(j) + " does not match the allocation");
    }
    if (alloc.bits[j] > 0 && circuits[j].backend_bits != alloc.bits[j] - 1) {
      throw Error(ErrorCode::kInvalidArgument, "backend of channel " + std::to_string(j) + " must resolve N_j - 1 bits");
    }
  }

  const std::size_t ws = img.width() / kPoints;
  std::array<double, kPoints> noise_rms{};
  for (std::size_t j = 0; j < kPoints; ++j) noise_rms[j] = noise_rng ? thermal_noise_rms(circuits[j]) : 0.0;
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::vector<ChannelCodes> per_plane;
  for (const auto& plane : img.planes) {
    ChannelCodes codes;
    codes.m = kPoints;
    codes.bits = alloc.bits;
    codes.codes.resize(kPoints);
    for (std::size_t j = 0; j < kPoints; ++j) {
      codes.ranges.push_back(channel_range(j));
      if (alloc.bits[j] > 0) codes.codes[j].reserve(ws * plane.height);
    }
    for (std::size_t r = 0; r < plane.height; ++r) {
      auto row = plane.row(r);
      for (std::size_t s = 0; s < ws; ++s) {
        Segment x;
        std::copy_n(row.begin() + static_cast<std::ptrdiff_t>(s * kPoints), kPoints, x.begin());
        for (std::size_t j = 0; j < kPoints; ++j) {
          if (alloc.bits[j] == 0) continue;
          const double noise = noise_rng ? noise_rms[j] * unit_normal(*noise_rng) : 0.0;
          codes.codes[j].push_back(*pipeline_digitize(x, circuits[j], alloc.bits[j], noise).code);
        }
      }
    }
    per_plane.push_back(std::move(codes));
  }
  return assemble(img, alloc, per_plane);
}

// ---------------------------------------------------------------------------
// Monte Carlo over capacitor mismatch.

struct MismatchOptions {
  double sigma = 0.01;        // relative standard deviation per capacitor
  bool include_subadc = true; // false restricts mismatch to the MDAC
};

/// Gaussian draw truncated to +-5 sigma by resampling.
template <typename Rng>
double draw_deviation(Rng& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, sigma);
  for (;;) {
    const double e = dist(rng);
    if (std::abs(e) <= 5.0 * sigma) return e;
  }
}

/// Fills every capacitor deviation in a fixed order (mdac[0..3], reference,
/// feedback, subadc[0..3]) so a given RNG state always maps to the same
/// circuit.
template <typename Rng>
CapMismatch draw_mismatch(Rng& rng, const MismatchOptions& opt) {
  CapMismatch m;
  for (auto& e : m.mdac) e = draw_deviation(rng, opt.sigma);
  m.reference = draw_deviation(rng, opt.sigma);
  m.feedback = draw_deviation(rng, opt.sigma);
  for (auto& e : m.subadc) {
    const double d = draw_deviation(rng, opt.sigma);
    e = opt.include_subadc ? d : 0.0;
  }
  return m;
}

/// Independent generator for trial `trial` of a run seeded with `seed`.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

struct MonteCarloReport {
  std::size_t trials = 0;
  std::vector<double> psnr_samples;  // dB, indexed by trial
  std::uint64_t seed = 0;
  double mismatch_sigma = 0.0;
  double opamp_gain_db = kInfiniteGain;
  double ideal_psnr = 0.0;           // same image through ideal circuits

  double min() const { return *std::min_element(psnr_samples.begin(), psnr_samples.end()); }
  double max() const { return *std::max_element(psnr_samples.begin(), psnr_samples.end()); }
  double spread() const { return max() - min(); }
  double mean() const {
    double s = 0.0;
    for (double v : psnr_samples) s += v;
    return s / static_cast<double>(psnr_samples.size());
  }
};

struct MonteCarloOptions {
  MismatchOptions mismatch;
  double opamp_gain_db = 40.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool thermal_noise = false;  // off by default; mismatch + gain only
};

inline double digitized_psnr(const Image& img, const BitAllocation& alloc, std::span<const EhtCircuit> circuits,
                             std::mt19937_64* noise_rng = nullptr) {
  const Image rec = decode(digitize_image(img, alloc, circuits, noise_rng));
  return psnr(crop_width(img, rec.width()), rec);
}

/// Each trial draws a fresh circuit set from its own substream of `seed`,
/// digitizes, decodes and records PSNR against the (width-clipped) input.
/// The report depends only on the inputs, never on the thread count.
inline MonteCarloReport monte_carlo(const Image& img, const BitAllocation& alloc, std::size_t trials,
                                    const MonteCarloOptions& opt) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one trial");
  MonteCarloReport rep;
  rep.trials = trials;
  rep.seed = opt.seed;
  rep.mismatch_sigma = opt.mismatch.sigma;
  rep.opamp_gain_db = opt.opamp_gain_db;
  rep.psnr_samples.assign(trials, 0.0);
  const auto ideal = ideal_circuits(alloc);
  rep.ideal_psnr = digitized_psnr(img, alloc, ideal);

  parallel_for(trials, opt.threads, [&](std::size_t t) {
    auto rng = trial_rng(opt.seed, t);
    auto circuits = ideal_circuits(alloc, opt.opamp_gain_db);
    for (auto& c : circuits) c.mismatch = draw_mismatch(rng, opt.mismatch);
    rep.psnr_samples[t] = digitized_psnr(img, alloc, circuits, opt.thermal_noise ? &rng : nullptr);
  });
  return rep;
}

struct Histogram {
  std::vector<double> edges;         // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; the last bin is closed on the right.
inline Histogram histogram(std::span<const double> samples, std::size_t bins) {
  if (samples.empty() || bins == 0) throw Error(ErrorCode::kInvalidArgument, "empty histogram");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  double lo = *lo_it, hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
  h.edges.back() = hi;
  for (double v : samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    h.counts[std::min(b, bins - 1)]++;
  }
  return h;
}

}  // namespace htq::adc
