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

// htq: command-line front end for the Hadamard transform-quantization codec.
//
//   htq calibrate img...            per-channel gains from a calibration set
//   htq encode in.png -o out.htq    compress
//   htq decode in.htq -o out.png    reconstruct
//   htq sweep img... -o sweep.csv   PSNR/SSIM/power across sizes and configs
//   htq power --bits 8565           converter power tables
//   htq adcsim img -o mc.csv        Monte Carlo study of the EHT front end

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "htq/adcsim.hpp"
#include "htq/experiment.hpp"
#include "htq/htq.hpp"
#include "htq/image_io.hpp"

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kUsage = 2, kIoError = 3, kFormatError = 4 };

int exit_code_for(htq::ErrorCode c) {
  switch (c) {
    case htq::ErrorCode::kIo:
      return kIoError;
    case htq::ErrorCode::kBadMagic:
    case htq::ErrorCode::kTruncatedPayload:
    case htq::ErrorCode::kHeaderFieldOutOfRange:
    case htq::ErrorCode::kUnsupportedFormat:
      return kFormatError;
    case htq::ErrorCode::kInvalidArgument:
    case htq::ErrorCode::kBitsOutOfRange:
    case htq::ErrorCode::kAlphaNegative:
    case htq::ErrorCode::kNonPowerOfTwo:
    case htq::ErrorCode::kOrderTooLarge:
    case htq::ErrorCode::kBackendBitsNegative:
      return kUsage;
    default:
      return kFailure;
  }
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (tok.empty() || used != tok.size()) {
      throw htq::Error(htq::ErrorCode::kInvalidArgument, "bad integer list '" + text + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_gain_db(const std::string& text) {
  if (text == "inf" || text == "infinity") return htq::adc::kInfiniteGain;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw htq::Error(htq::ErrorCode::kInvalidArgument, "bad gain '" + text + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw htq::Error(htq::ErrorCode::kIo, "cannot open " + path + " for writing");
  return f;
}

// Shared codec configuration flags.
struct CodecFlags {
  std::size_t m = 4;
  std::string alphas = "0,3,2,3";
  int n0 = 8;
  std::string bits;

  void attach(CLI::App* cmd) {
    cmd->add_option("-m,--order", m, "transform order M (power of two)")->capture_default_str();
    cmd->add_option("--alphas", alphas, "comma-separated gain exponents")->capture_default_str();
    cmd->add_option("--n0", n0, "DC channel bits")->capture_default_str();
    cmd->add_option("--bits", bits, "BPC override, e.g. 8060 or 12,9,10,9");
  }

  htq::BitAllocation allocation() const {
    auto al = parse_int_list(alphas);
    if (al.size() != m) throw htq::Error(htq::ErrorCode::kInvalidArgument, "--alphas needs M entries");
    if (!bits.empty()) return htq::BitAllocation::with_bits(std::move(al), htq::parse_bpc(bits, m));
    return htq::BitAllocation::from_alphas(n0, std::move(al));
  }
};

struct AdcFlags {
  htq::power::AdcParams p;

  void attach(CLI::App* cmd) {
    cmd->add_option("--fs", p.fs, "sampling rate [Hz]")->capture_default_str();
    cmd->add_option("--vref", p.v_ref, "reference voltage [V]")->capture_default_str();
    cmd->add_option("--veff", p.v_eff, "overdrive voltage [V]")->capture_default_str();
    cmd->add_option("--cmin", p.c_min, "minimum capacitance [F]")->capture_default_str();
    cmd->add_option("--cunit", p.c_unit, "SAR unit capacitance [F]")->capture_default_str();
    cmd->add_option("--temp", p.temperature, "temperature [K]")->capture_default_str();
  }
};

void print_allocation(const htq::BitAllocation& a) {
  std::cout << "alpha:";
  for (int v : a.alphas) std::cout << ' ' << v;
  std::cout << "\ngain: ";
  for (int v : a.alphas) std::cout << ' ' << (1 << v);
  std::cout << "\nbits: ";
  for (int v : a.bits) std::cout << ' ' << v;
  const auto r = a.average_bpp();
  std::cout << "\nbpp:   " << r.value() << " (" << r.num << '/' << r.den << ")\n";
}

int cmd_calibrate(const std::vector<std::string>& inputs, std::size_t m, int n0, int alpha_max,
                  const std::string& json_path) {
  std::vector<htq::ImagePlane> planes;
  for (const auto& path : inputs) planes.push_back(htq::io::to_gray(htq::io::read_image(path)));
  const auto res = htq::calibrate_dataset(planes, m, n0, alpha_max);
  if (res.degenerate_dc) {
    std::cerr << "warning: DegenerateDC: no image had a non-constant DC channel; all alphas are 0\n";
  }
  print_allocation(res.allocation);
  std::cout << "images used: " << res.images_used << " of " << planes.size() << '\n';
  if (!json_path.empty()) {
    nlohmann::json j;
    j["m"] = m;
    j["n0"] = n0;
    j["alphas"] = res.allocation.alphas;
    std::vector<int> gains;
    for (int a : res.allocation.alphas) gains.push_back(1 << a);
    j["gains"] = gains;
    j["bits"] = res.allocation.bits;
    j["mean_sigma_ratios"] = res.mean_ratios;
    j["images"] = inputs;
    j["images_used"] = res.images_used;
    j["degenerate_dc"] = res.degenerate_dc;
    auto f = open_out(json_path);
    f << j.dump(2) << '\n';
  }
  return kOk;
}

int cmd_encode(const std::string& in, const std::string& out, const CodecFlags& cf, unsigned threads) {
  const auto img = htq::io::read_image(in);
  const auto alloc = cf.allocation();
  const auto coded = htq::encode(img, alloc, threads);
  htq::write_htq(out, coded);
  const auto size = std::filesystem::file_size(out);
  const auto r = alloc.average_bpp();
  std::cout << "bpp: " << r.value() << " (" << r.num << '/' << r.den << ")\n"
            << "payload: " << coded.payload.size() << " bytes\n"
            << "file: " << size << " bytes\n";
  return kOk;
}

int cmd_decode(const std::string& in, const std::string& out, unsigned threads) {
  const auto coded = htq::read_htq(in);
  htq::io::write_image(out, htq::decode(coded, threads));
  std::cout << "decoded " << coded.header.width_segments() * coded.header.m << 'x' << coded.header.height << " ("
            << int(coded.header.color_channels) << " plane(s))\n";
  return kOk;
}

int cmd_sweep(const std::vector<std::string>& inputs, const std::string& sizes_text,
              const std::vector<std::string>& config_labels, const std::string& alphas_text, bool gray,
              const AdcFlags& af, const std::string& out, unsigned threads) {
  std::vector<htq::NamedImage> images;
  for (const auto& path : inputs) {
    auto img = htq::io::read_image(path);
    if (gray) img = htq::Image(htq::io::to_gray(img));
    images.push_back({stem(path), std::move(img)});
  }
  std::vector<std::size_t> sizes;
  for (int s : parse_int_list(sizes_text)) {
    if (s < 4) throw htq::Error(htq::ErrorCode::kInvalidArgument, "sizes must be >= 4");
    sizes.push_back(static_cast<std::size_t>(s));
  }
  std::vector<htq::SweepConfig> configs;
  for (const auto& c : config_labels) configs.push_back(htq::SweepConfig::parse(c));
  const auto rows = htq::run_sweep(images, sizes, configs, parse_int_list(alphas_text), af.p, threads);
  if (out.empty() || out == "-") {
    htq::write_sweep_csv(std::cout, rows);
  } else {
    auto f = open_out(out);
    htq::write_sweep_csv(f, rows);
    std::cout << "wrote " << rows.size() << " rows to " << out << '\n';
  }
  return kOk;
}

int cmd_power(const std::vector<std::string>& bpcs, const std::string& kind_text, bool rgb, const AdcFlags& af) {
  af.p.validate();
  using htq::power::AdcKind;
  std::cout << "P_pipe(8) = " << htq::power::pipelined_power(8, af.p) * 1e6 << " uW\n"
            << "P_sar(8)  = " << htq::power::sar_power(8, af.p) * 1e6 << " uW\n\n";
  htq::write_power_table(std::cout, af.p);
  if (bpcs.empty()) return kOk;
  std::vector<std::vector<int>> configs;
  for (const auto& b : bpcs) configs.push_back(htq::parse_bpc(b, 4));
  std::vector<AdcKind> kinds;
  if (kind_text == "pipelined" || kind_text == "both") kinds.push_back(AdcKind::kPipelined);
  if (kind_text == "sar" || kind_text == "both") kinds.push_back(AdcKind::kSar);
  for (auto k : kinds) {
    std::cout << '\n' << htq::power::to_string(k) << ":\n";
    htq::write_ppc_table(std::cout, configs, k, af.p);
    if (rgb) {
      for (const auto& bits : configs) {
        const auto mc = htq::power::multi_channel_power(bits, k, af.p);
        std::cout << "RGB total (" << htq::bpc_label(bits) << "): " << 3.0 * mc.total_normalized << '\n';
      }
    }
  }
  return kOk;
}

struct AdcsimFlags {
  std::size_t trials = 1000;
  double sigma = 0.01;
  std::string gain = "40";
  std::uint64_t seed = 1;
  std::size_t size = 32;
  std::size_t bins = 20;
  bool no_subadc = false;
  bool thermal = false;
  std::string csv;
  std::string hist;
};

int cmd_adcsim(const std::string& in, const CodecFlags& cf, const AdcsimFlags& f, unsigned threads) {
  if (cf.m != 4) throw htq::Error(htq::ErrorCode::kInvalidArgument, "the EHT front end is four-point");
  auto img = htq::Image(htq::io::to_gray(htq::io::read_image(in)));
  if (f.size > 0 && (img.width() != f.size || img.height() != f.size)) {
    img = htq::resize_bilinear(img, f.size, f.size);
    htq::round_to_8bit(img);
  }
  htq::adc::MonteCarloOptions opt;
  opt.mismatch.sigma = f.sigma;
  opt.mismatch.include_subadc = !f.no_subadc;
  opt.opamp_gain_db = parse_gain_db(f.gain);
  opt.seed = f.seed;
  opt.threads = threads;
  opt.thermal_noise = f.thermal;
  const auto alloc = cf.allocation();
  const auto rep = htq::adc::monte_carlo(img, alloc, f.trials, opt);

  auto emit = [&](std::ostream& os) {
    os << "trial,psnr_db\n" << std::setprecision(17);
    for (std::size_t t = 0; t < rep.trials; ++t) os << t << ',' << rep.psnr_samples[t] << '\n';
  };
  if (f.csv.empty() || f.csv == "-") {
    emit(std::cout);
  } else {
    auto os = open_out(f.csv);
    emit(os);
  }
  if (!f.hist.empty()) {
    const auto h = htq::adc::histogram(rep.psnr_samples, f.bins);
    auto os = open_out(f.hist);
    os << "bin_lo,bin_hi,count\n" << std::setprecision(10);
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
      os << h.edges[i] << ',' << h.edges[i + 1] << ',' << h.counts[i] << '\n';
    }
  }
  std::cerr << std::fixed << std::setprecision(3) << "trials " << rep.trials << "  ideal " << rep.ideal_psnr
            << " dB  mean " << rep.mean() << " dB  min " << rep.min() << "  max " << rep.max() << "  spread "
            << rep.spread() << " dB\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hadamard transform-quantization codec and ADC models"};
  app.require_subcommand(1);
  app.fallthrough();
  unsigned threads = 1;
  app.add_option("-j,--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

  auto* cal = app.add_subcommand("calibrate", "derive per-channel gains from images");
  std::vector<std::string> cal_in;
  std::size_t cal_m = 4;
  int cal_n0 = 8, cal_amax = htq::kDefaultAlphaMax;
  std::string cal_json;
  cal->add_option("images", cal_in, "calibration images")->required();
  cal->add_option("-m,--order", cal_m, "transform order M")->capture_default_str();
  cal->add_option("--n0", cal_n0, "DC channel bits")->capture_default_str();
  cal->add_option("--alpha-max", cal_amax, "largest gain exponent")->capture_default_str();
  cal->add_option("--json", cal_json, "write a JSON sidecar");

  auto* enc = app.add_subcommand("encode", "compress an image to .htq");
  std::string enc_in, enc_out;
  CodecFlags enc_cf;
  enc->add_option("input", enc_in, "PGM/PPM/PNG image")->required();
  enc->add_option("-o,--output", enc_out, "output .htq")->required();
  enc_cf.attach(enc);

  auto* dec = app.add_subcommand("decode", "reconstruct an image from .htq");
  std::string dec_in, dec_out;
  dec->add_option("input", dec_in, ".htq file")->required();
  dec->add_option("-o,--output", dec_out, "output image (.pgm/.ppm/.png)")->required();

  auto* sw = app.add_subcommand("sweep", "quality and power across sizes and configurations");
  std::vector<std::string> sw_in;
  std::string sw_sizes = "64,128,256,512", sw_alphas = "0,3,2,3", sw_out;
  std::vector<std::string> sw_configs = htq::kPaperConfigs;
  bool sw_gray = false;
  AdcFlags sw_af;
  sw->add_option("images", sw_in, "input images")->required();
  sw->add_option("--sizes", sw_sizes, "square sizes, comma-separated")->capture_default_str();
  sw->add_option("--configs", sw_configs, "BPC labels; uniform labels mean baseline")->delimiter(',')
      ->capture_default_str();
  sw->add_option("--alphas", sw_alphas, "gain exponents for proposed configs")->capture_default_str();
  sw->add_flag("--gray", sw_gray, "convert colour inputs to luma first");
  sw->add_option("-o,--output", sw_out, "CSV path (default stdout)");
  sw_af.attach(sw);

  auto* pw = app.add_subcommand("power", "normalized converter power tables");
  std::vector<std::string> pw_bits;
  std::string pw_kind = "pipelined";
  bool pw_rgb = false;
  AdcFlags pw_af;
  pw->add_option("--bits", pw_bits, "BPC strings for the per-channel table")->delimiter(';');
  pw->add_option("--kind", pw_kind, "pipelined, sar or both")
      ->check(CLI::IsMember({"pipelined", "sar", "both"}))
      ->capture_default_str();
  pw->add_flag("--rgb", pw_rgb, "also report three-plane totals");
  pw_af.attach(pw);

  auto* mc = app.add_subcommand("adcsim", "Monte Carlo mismatch study of the EHT front end");
  std::string mc_in;
  CodecFlags mc_cf;
  mc_cf.bits = "8565";
  AdcsimFlags mc_f;
  mc->add_option("input", mc_in, "image (converted to luma)")->required();
  mc_cf.attach(mc);
  mc->add_option("--trials", mc_f.trials, "Monte Carlo trials")->capture_default_str();
  mc->add_option("--sigma", mc_f.sigma, "relative capacitor mismatch (1 sigma)")->capture_default_str();
  mc->add_option("--gain-db", mc_f.gain, "op-amp DC gain in dB, or inf")->capture_default_str();
  mc->add_option("--seed", mc_f.seed, "master seed")->capture_default_str();
  mc->add_option("--size", mc_f.size, "resize to size x size first (0 keeps input)")->capture_default_str();
  mc->add_option("--bins", mc_f.bins, "histogram bins")->capture_default_str();
  mc->add_flag("--mdac-only", mc_f.no_subadc, "leave sub-ADC capacitors ideal");
  mc->add_flag("--thermal", mc_f.thermal, "add kT/C noise to the residue");
  mc->add_option("-o,--output", mc_f.csv, "per-trial CSV (default stdout)");
  mc->add_option("--hist", mc_f.hist, "histogram CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (threads == 0) threads = htq::default_threads();

  try {
    if (*cal) return cmd_calibrate(cal_in, cal_m, cal_n0, cal_amax, cal_json);
    if (*enc) return cmd_encode(enc_in, enc_out, enc_cf, threads);
    if (*dec) return cmd_decode(dec_in, dec_out, threads);
    if (*sw) return cmd_sweep(sw_in, sw_sizes, sw_configs, sw_alphas, sw_gray, sw_af, sw_out, threads);
    if (*pw) return cmd_power(pw_bits, pw_kind, pw_rgb, pw_af);
    if (*mc) return cmd_adcsim(mc_in, mc_cf, mc_f, threads);
  } catch (const htq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
