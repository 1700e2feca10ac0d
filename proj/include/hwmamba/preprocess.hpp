// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hwmamba/random.hpp"

namespace hwm {

inline constexpr std::size_t kNumLeads = 12;
inline constexpr std::size_t kNumClasses = 26;
inline constexpr double kTargetFs = 500.0;
inline constexpr std::size_t kTargetLength = 8192;

/// Canonical diagnosis abbreviations; label vectors follow this order.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames{
    "AF",  "AFL",  "BBB",    "Brady", "CLBBB", "CRBBB", "1AVB", "IRBBB", "LAD",
    "LAnFB", "LPR", "LQRSV", "LQT",  "NSIVCD", "NSR",  "PAC",  "PR",    "PRWP",
    "PVC", "QAb",  "RAD",    "SA",    "SB",    "STach", "TAb", "TInv"};

/// Position of `abbr` in kClassNames; DataError if unknown.
std::size_t class_index(std::string_view abbr);
inline constexpr std::size_t kNormalClass = 14;  // NSR

/// One recording. `signal` is lead-major: lead l occupies [l*T, (l+1)*T).
struct EcgRecord {
  std::string id;
  double fs = kTargetFs;
  std::size_t num_samples = 0;
  std::vector<double> signal;
  std::array<std::uint8_t, kNumClasses> labels{};

  double at(std::size_t lead, std::size_t t) const { return signal[lead * num_samples + t]; }
  std::vector<std::string> label_names() const;
  /// Checks T >= 1, 12 leads, finite fs > 0; throws DataError.
  void validate() const;
};

/// Resamples every lead to `target_fs`. 500 -> 500 is the identity, 1000 -> 500
/// is polyphase decimation by two, anything else goes through the Fourier path.
/// Output length is round(T * target / fs).
EcgRecord resample(const EcgRecord& rec, double target_fs = kTargetFs);

/// Single-lead helpers behind resample().
std::vector<double> decimate_by_two(const std::vector<double>& x);
std::vector<double> fourier_resample(const std::vector<double>& x, std::size_t out_len);
/// Low-pass prototype used by decimate_by_two (odd length, unit DC gain).
const std::vector<double>& decimation_filter();

enum class CropMode { Random, Center };

/// Right zero-padding or a contiguous window of `length` samples. Random
/// windows start uniformly in [0, T - length].
EcgRecord fix_length(const EcgRecord& rec, std::size_t length, Rng& rng,
                     CropMode mode = CropMode::Random);
/// Window start used for a record of `total` samples.
std::size_t crop_start(std::size_t total, std::size_t length, Rng& rng, CropMode mode);

/// Per-lead (x - mean) / std with population std; leads with std < 1e-8 are
/// left as they are.
EcgRecord zscore(const EcgRecord& rec);

/// resample -> fix_length -> optional zscore, with the record's own stream
/// derived from (seed, id).
EcgRecord preprocess_record(const EcgRecord& rec, std::size_t length, bool normalize,
                            std::uint64_t seed);

/// Record bundle: <dir>/<id>.json header plus <dir>/<id>.f32 samples.
void save_record(const EcgRecord& rec, const std::filesystem::path& dir);
EcgRecord load_record(const std::filesystem::path& header);
/// Every record header in `dir`, sorted by id. Other JSON files are skipped.
std::vector<std::filesystem::path> list_records(const std::filesystem::path& dir);

}  // namespace hwm
