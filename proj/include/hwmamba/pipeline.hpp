// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwmamba/metrics.hpp"
#include "hwmamba/net.hpp"
#include "hwmamba/optim.hpp"
#include "hwmamba/persist.hpp"
#include "hwmamba/preprocess.hpp"

namespace hwm {

/// Records at 500 Hz plus the label space they are scored in. `classes` is a
/// subset of the canonical table, kept in canonical order.
struct Dataset {
  std::vector<std::string> classes;
  std::vector<EcgRecord> records;

  /// N x classes.size() binary targets; DataError if a record carries a label
  /// outside `classes`.
  Matrix targets() const;
  Matrix targets(const std::vector<std::size_t>& rows) const;
  std::vector<std::string> ids(const std::vector<std::size_t>& rows) const;
  /// Row index of every id; DataError for unknown ids.
  std::vector<std::size_t> rows_of(const std::vector<std::string>& ids) const;
};

/// Canonical-order class list used when a data directory has no classes.json.
std::vector<std::string> all_classes();
/// Sorts names into canonical order; DataError on unknown or repeated names.
std::vector<std::string> canonical_subset(const std::vector<std::string>& names);

/// Loads every record bundle under `dir`, resampled to 500 Hz. The label
/// space comes from <dir>/classes.json when present, else all 26 classes.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& data, const std::filesystem::path& dir);

/// Partitions rows into groups of the given proportions by greedy
/// rarest-label-first stratification. Deterministic for a fixed seed.
std::vector<std::vector<std::size_t>> stratify(const Matrix& labels,
                                               const std::vector<std::size_t>& rows,
                                               const std::vector<double>& ratios,
                                               std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train, test;
};
/// Train/test partition with `train_fraction` of the rows in train.
Split stratified_split(const Matrix& labels, double train_fraction, std::uint64_t seed);
/// k (fit, validation) pairs over `rows`; every row validates exactly once.
std::vector<Split> kfold(const Matrix& labels, const std::vector<std::size_t>& rows, std::size_t k,
                         std::uint64_t seed);

struct SynthSpec {
  std::size_t n = 1000;
  std::size_t num_classes = 4;
  std::size_t seq_len = 256;
  std::uint64_t seed = 0;
  double noise = 0.1;
  std::size_t max_labels = 3;
};

/// Class list of a synthetic set: NSR, then the other abbreviations in
/// canonical order, truncated to `num_classes`.
std::vector<std::string> synth_class_list(std::size_t num_classes);
/// Noise-free signature of the k-th entry of synth_class_list(): a sinusoid of
/// its own frequency shaped by its own lead gains.
std::vector<double> synth_signature(std::size_t k, std::size_t seq_len);
/// Per-class probability of being active in a record, as generated.
std::vector<double> synth_label_frequencies(const SynthSpec& spec);
/// Records activate 1..max_labels classes and sum their signatures plus white
/// noise. The first num_classes records carry one class each.
Dataset synth_dataset(const SynthSpec& spec);

/// [1 x 12 x length] network input: center or random window, optional zscore.
Tensor make_input(const EcgRecord& rec, std::size_t length, CropMode mode, Rng& rng,
                  bool normalize);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based count of completed epochs
  double lr = 0.0;        // rate at the start of the epoch
  double loss = 0.0;      // mean batch loss
  double subset_accuracy = 0.0;  // on the training forward passes, tau = 0.5
  double hamming_loss = 0.0;
  double seconds = 0.0;
};
void to_json(nlohmann::json& j, const EpochLog& e);
void from_json(const nlohmann::json& j, EpochLog& e);

struct TrainOptions {
  /// When set, each epoch writes <dir>/epoch_NNN/ and appends to <dir>/train_log.jsonl.
  std::optional<std::filesystem::path> checkpoint_dir;
  /// Continue from a saved state; its meta.epoch epochs are skipped.
  std::optional<ModelState> resume;
  /// Stop after this many total epochs (default: cfg.epochs).
  std::optional<std::size_t> stop_after;
  std::function<void(const EpochLog&)> on_epoch;
  nlohmann::json meta = nlohmann::json::object();  // copied into checkpoints
};

struct TrainResult {
  HWMambaNet net;
  AdamState optimizer;
  std::vector<EpochLog> log;
};

/// Mini-batch Adam on mean BCE over `rows` with the warmup/cosine schedule.
/// Batch order and crops depend only on (seed, epoch), so a resumed run
/// repeats the uninterrupted one.
TrainResult train_model(const TrainConfig& cfg, const Dataset& data,
                        const std::vector<std::size_t>& rows, const TrainOptions& options = {});

/// Sigmoid outputs for `rows`, center-cropped or padded, no graph recorded.
Matrix predict(const HWMambaNet& net, const Dataset& data, const std::vector<std::size_t>& rows);

/// Threshold per metric, searched on `calibration`.
std::map<Metric, double> calibrate_thresholds(const PredictionSet& calibration,
                                              const WeightMatrix& weights);
/// Reads {"metric": tau, ...} or a threshold-command result {"metric": name, "tau": t};
/// the latter applies its single tau to every threshold-dependent metric.
std::map<Metric, double> load_thresholds(const std::filesystem::path& path);

/// Scores `test` with thresholds from "train", "test" or a JSON file. When
/// `train` is given the report also carries the train-vs-test gap rows.
MetricsReport evaluate_predictions(const PredictionSet& test, const PredictionSet* train,
                                   const std::string& threshold_source, const WeightMatrix& weights);

/// Summary tables over several reports: one metrics row per report (plus the
/// mean when there are several), per-class F1 columns, and the gap rows.
std::string render_reports(const std::vector<std::pair<std::string, MetricsReport>>& reports,
                           const std::string& format);

}  // namespace hwm
