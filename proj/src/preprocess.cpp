// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/preprocess.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>

#include <json.hpp>

#include "hwmamba/errors.hpp"

namespace hwm {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t class_index(std::string_view abbr) {
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (kClassNames[i] == abbr) return i;
  throw DataError("unknown class abbreviation '" + std::string(abbr) + "'");
}

std::vector<std::string> EcgRecord::label_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < kNumClasses; ++i)
    if (labels[i]) out.emplace_back(kClassNames[i]);
  return out;
}

void EcgRecord::validate() const {
  if (!(fs > 0) || !std::isfinite(fs)) throw DataError("record " + id + ": fs must be positive");
  if (num_samples == 0) throw DataError("record " + id + ": no samples");
  if (signal.size() != kNumLeads * num_samples)
    throw DataError("record " + id + ": expected 12 leads of " + std::to_string(num_samples) +
                    " samples, got " + std::to_string(signal.size()) + " values");
  for (auto l : labels)
    if (l > 1) throw DataError("record " + id + ": labels must be 0 or 1");
}

namespace {

constexpr std::size_t kFilterTaps = 129;
constexpr double kKaiserBeta = 8.0;

std::vector<double> lead(const EcgRecord& rec, std::size_t l) {
  auto first = rec.signal.begin() + static_cast<long>(l * rec.num_samples);
  return {first, first + static_cast<long>(rec.num_samples)};
}

std::vector<double> design_lowpass() {
  // Cutoff at half the Nyquist of the 500 Hz target: 125 Hz at 1000 Hz input.
  const double fc = 125.0 / 1000.0;
  const double mid = (kFilterTaps - 1) / 2.0;
  const double i0b = std::cyl_bessel_i(0.0, kKaiserBeta);
  std::vector<double> h(kFilterTaps);
  for (std::size_t k = 0; k < kFilterTaps; ++k) {
    const double t = static_cast<double>(k) - mid;
    const double arg = 2.0 * fc * t;
    const double sinc = t == 0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = t / mid;
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0b;
    h[k] = 2.0 * fc * sinc * w;
  }
  double dc = 0.0;
  for (double v : h) dc += v;
  for (double& v : h) v /= dc;
  return h;
}

std::size_t rounded_length(std::size_t n, double from, double to) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * to / from));
}

}  // namespace

const std::vector<double>& decimation_filter() {
  static const std::vector<double> h = design_lowpass();
  return h;
}

std::vector<double> decimate_by_two(const std::vector<double>& x) {
  const auto& h = decimation_filter();
  const long delay = static_cast<long>(h.size() / 2);
  const long n = static_cast<long>(x.size());
  const std::size_t out_len = (x.size() + 1) / 2;
  std::vector<double> y(out_len, 0.0);
  // Only every second output of the delay-compensated filter is evaluated.
  // Samples past either end repeat the boundary value, so DC passes exactly.
  const long taps = static_cast<long>(h.size());
  for (std::size_t m = 0; m < out_len; ++m) {
    const long centre = 2 * static_cast<long>(m) + delay;
    double acc = 0.0;
    for (long k = 0; k < taps; ++k) acc += h[k] * x[std::clamp(centre - k, 0L, n - 1)];
    y[m] = acc;
  }
  return y;
}

std::vector<double> fourier_resample(const std::vector<double>& x, std::size_t out_len) {
  const std::size_t n = x.size();
  if (n == 0 || out_len == 0) throw DataError("fourier_resample: empty signal");
  if (out_len == n) return x;
  std::vector<double> in(x);
  std::vector<std::complex<double>> spec(n / 2 + 1);
  fftw_plan fwd = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                       reinterpret_cast<fftw_complex*>(spec.data()),
                                       FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  std::vector<std::complex<double>> out_spec(out_len / 2 + 1);
  const std::size_t common = std::min(n, out_len);
  const std::size_t keep = common / 2 + 1;
  std::copy_n(spec.begin(), keep, out_spec.begin());
  if (common % 2 == 0) {
    // The shared Nyquist bin is split or joined between the two halves.
    if (out_len < n)
      out_spec[common / 2] *= 2.0;
    else
      out_spec[common / 2] *= 0.5;
  }
  std::vector<double> y(out_len);
  fftw_plan inv = fftw_plan_dft_c2r_1d(static_cast<int>(out_len),
                                       reinterpret_cast<fftw_complex*>(out_spec.data()), y.data(),
                                       FFTW_ESTIMATE);
  fftw_execute(inv);
  fftw_destroy_plan(inv);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : y) v *= scale;
  return y;
}

EcgRecord resample(const EcgRecord& rec, double target_fs) {
  if (!(rec.fs > 0) || !std::isfinite(rec.fs)) throw DataError("resample: fs must be positive");
  if (!(target_fs > 0)) throw DataError("resample: target rate must be positive");
  rec.validate();
  if (rec.fs == target_fs) return rec;

  EcgRecord out = rec;
  out.fs = target_fs;
  out.num_samples = rounded_length(rec.num_samples, rec.fs, target_fs);
  if (out.num_samples == 0) throw DataError("resample: record " + rec.id + " is too short");
  out.signal.assign(kNumLeads * out.num_samples, 0.0);
  const bool halve = rec.fs == 2.0 * target_fs;
  for (std::size_t l = 0; l < kNumLeads; ++l) {
    auto x = lead(rec, l);
    auto y = halve ? decimate_by_two(x) : fourier_resample(x, out.num_samples);
    std::copy(y.begin(), y.end(), out.signal.begin() + static_cast<long>(l * out.num_samples));
  }
  return out;
}

std::size_t crop_start(std::size_t total, std::size_t length, Rng& rng, CropMode mode) {
  if (total <= length) return 0;
  const std::size_t span = total - length;
  if (mode == CropMode::Center) return span / 2;
  return std::uniform_int_distribution<std::size_t>(0, span)(rng);
}

EcgRecord fix_length(const EcgRecord& rec, std::size_t length, Rng& rng, CropMode mode) {
  if (length == 0) throw ParameterError("fix_length: length must be positive");
  if (rec.num_samples == length) return rec;
  EcgRecord out = rec;
  out.num_samples = length;
  out.signal.assign(kNumLeads * length, 0.0);
  const std::size_t start = crop_start(rec.num_samples, length, rng, mode);
  const std::size_t copy = std::min(length, rec.num_samples);
  for (std::size_t l = 0; l < kNumLeads; ++l) {
    auto src = rec.signal.begin() + static_cast<long>(l * rec.num_samples + start);
    std::copy_n(src, copy, out.signal.begin() + static_cast<long>(l * length));
  }
  return out;
}

EcgRecord zscore(const EcgRecord& rec) {
  EcgRecord out = rec;
  const std::size_t t = rec.num_samples;
  for (std::size_t l = 0; l < kNumLeads; ++l) {
    double* x = out.signal.data() + l * t;
    double mean = 0.0;
    for (std::size_t i = 0; i < t; ++i) mean += x[i];
    mean /= static_cast<double>(t);
    double var = 0.0;
    for (std::size_t i = 0; i < t; ++i) var += (x[i] - mean) * (x[i] - mean);
    const double sd = std::sqrt(var / static_cast<double>(t));
    if (sd < 1e-8) continue;
    for (std::size_t i = 0; i < t; ++i) x[i] = (x[i] - mean) / sd;
  }
  return out;
}

EcgRecord preprocess_record(const EcgRecord& rec, std::size_t length, bool normalize,
                            std::uint64_t seed) {
  Rng rng(mix_seed(seed, fnv1a(rec.id)));
  EcgRecord out = fix_length(resample(rec, kTargetFs), length, rng, CropMode::Random);
  return normalize ? zscore(out) : out;
}

void save_record(const EcgRecord& rec, const fs::path& dir) {
  rec.validate();
  fs::create_directories(dir);
  json header{{"id", rec.id},
              {"fs", rec.fs},
              {"num_samples", rec.num_samples},
              {"labels", rec.label_names()}};
  std::ofstream h(dir / (rec.id + ".json"));
  if (!h) throw DataError("cannot write " + (dir / (rec.id + ".json")).string());
  h << header.dump(2) << '\n';

  std::string bytes(rec.signal.size() * 4, '\0');
  for (std::size_t i = 0; i < rec.signal.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(rec.signal[i]));
    for (int b = 0; b < 4; ++b) bytes[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  std::ofstream s(dir / (rec.id + ".f32"), std::ios::binary);
  if (!s) throw DataError("cannot write " + (dir / (rec.id + ".f32")).string());
  s.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

EcgRecord load_record(const fs::path& header_path) {
  std::ifstream h(header_path);
  if (!h) throw DataError("cannot open " + header_path.string());
  EcgRecord rec;
  try {
    json header = json::parse(h);
    rec.id = header.at("id").get<std::string>();
    rec.fs = header.at("fs").get<double>();
    rec.num_samples = header.at("num_samples").get<std::size_t>();
    for (const auto& name : header.at("labels")) rec.labels[class_index(name.get<std::string>())] = 1;
  } catch (const json::exception& e) {
    throw DataError(header_path.string() + ": " + e.what());
  }

  fs::path data_path = header_path;
  data_path.replace_extension(".f32");
  std::ifstream s(data_path, std::ios::binary);
  if (!s) throw DataError("cannot open " + data_path.string());
  std::string bytes((std::istreambuf_iterator<char>(s)), std::istreambuf_iterator<char>());
  if (bytes.size() != kNumLeads * rec.num_samples * 4)
    throw DataError(data_path.string() + ": expected " +
                    std::to_string(kNumLeads * rec.num_samples * 4) + " bytes, found " +
                    std::to_string(bytes.size()));
  rec.signal.resize(kNumLeads * rec.num_samples);
  for (std::size_t i = 0; i < rec.signal.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b)
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[i * 4 + b])) << (8 * b);
    rec.signal[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  rec.validate();
  for (double v : rec.signal)
    if (!std::isfinite(v)) throw DataError(data_path.string() + ": non-finite sample");
  return rec;
}

std::vector<fs::path> list_records(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto& p = entry.path();
    if (p.extension() != ".json") continue;
    fs::path data = p;
    data.replace_extension(".f32");
    if (fs::exists(data)) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hwm
