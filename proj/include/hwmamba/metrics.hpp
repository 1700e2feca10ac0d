// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hwm {

/// Row-major N x C matrix of probabilities or 0/1 labels.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

/// Probabilities in [0,1] and binary targets for the same records and classes.
struct PredictionSet {
  std::vector<std::string> classes;
  Matrix probs;
  Matrix targets;

  /// Shapes agree, probs in [0,1], targets in {0,1}; throws DataError.
  void validate() const;
};

/// Challenge weights with labelled axes. Diagonal is 1, entries in [0,1].
struct WeightMatrix {
  std::vector<std::string> classes;
  Matrix w;

  static WeightMatrix identity(const std::vector<std::string>& classes);
  /// CSV with a header row and a first column of abbreviations. Only the
  /// classes in `classes` are kept, reordered to match.
  static WeightMatrix load_csv(const std::filesystem::path& path,
                               const std::vector<std::string>& classes);
  void save_csv(const std::filesystem::path& path) const;
  void validate() const;
  /// Position of the normal class (NSR); DataError if absent.
  std::size_t normal_index() const;
};

enum class Metric { SubsetAccuracy, ChallengeScore, HammingLoss, F1Macro, F1Weighted, Auroc };

inline constexpr std::array<Metric, 5> kThresholdMetrics{
    Metric::SubsetAccuracy, Metric::ChallengeScore, Metric::HammingLoss, Metric::F1Macro,
    Metric::F1Weighted};

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);  // ConfigError if unknown
bool lower_is_better(Metric m);

/// 1 where prob > tau.
Matrix binarize(const Matrix& probs, double tau);

double subset_accuracy(const Matrix& preds, const Matrix& targets);
double hamming_loss(const Matrix& preds, const Matrix& targets);

struct F1Scores {
  std::vector<double> per_class;
  double macro = 0.0;
  std::optional<double> weighted;  // empty when no class has a positive target
};
F1Scores f1_scores(const Matrix& preds, const Matrix& targets);
/// Support-weighted F1; DataError when no class has a positive target.
double f1_weighted(const Matrix& preds, const Matrix& targets);

/// Union-normalized generalized confusion matrix A[true][pred].
Matrix challenge_confusion(const Matrix& preds, const Matrix& targets);
/// (s - s_inactive) / (s_true - s_inactive); DataError when degenerate.
double challenge_score(const Matrix& preds, const Matrix& targets, const WeightMatrix& weights);

/// Mann-Whitney AUROC of one column with midranks; nullopt without both outcomes.
std::optional<double> auroc_binary(const std::vector<double>& scores,
                                   const std::vector<double>& labels);
/// Mean over classes that have both outcomes; DataError when none do.
double auroc_macro(const Matrix& probs, const Matrix& targets);

/// Value of a threshold-dependent metric at tau.
double metric_at(Metric m, const PredictionSet& set, double tau, const WeightMatrix* weights);

/// The 51 grid points i/50.
std::vector<double> threshold_grid();

struct ThresholdResult {
  double tau = 0.0;
  double value = 0.0;
};
/// Best grid point (max, or min for Hamming); ties go to the smallest tau.
ThresholdResult threshold_search(const PredictionSet& set, Metric m,
                                 const WeightMatrix* weights = nullptr);

struct GapRow {
  Metric metric;
  double tau_train = 0.0, tau_test = 0.0;
  double value_train_tau = 0.0;  // on test, with the train-calibrated tau
  double value_test_tau = 0.0;   // on test, with the test-calibrated tau
  double gap = 0.0;              // |value_test_tau - value_train_tau|
};
/// One row per threshold-dependent metric.
std::vector<GapRow> threshold_gap_report(const PredictionSet& train, const PredictionSet& test,
                                         const WeightMatrix* weights = nullptr);

struct MetricsReport {
  std::vector<std::string> classes;
  double subset_accuracy = 0.0;
  double challenge_score = 0.0;
  double hamming_loss = 0.0;
  double f1_macro = 0.0;
  double f1_weighted = 0.0;
  double auroc_macro = 0.0;
  std::vector<double> per_class_f1;
  std::map<std::string, double> thresholds_used;
  std::string threshold_source;  // "train", "test" or "file"
  std::vector<GapRow> gaps;      // empty unless both splits were available

  double value(Metric m) const;
};

/// Every metric, each threshold-dependent one at its own tau.
MetricsReport evaluate_metrics(const PredictionSet& set, const std::map<Metric, double>& taus,
                               const WeightMatrix& weights);

void to_json(nlohmann::json& j, const GapRow& r);
void from_json(const nlohmann::json& j, GapRow& r);
void to_json(nlohmann::json& j, const MetricsReport& r);
void from_json(const nlohmann::json& j, MetricsReport& r);

/// Header and one row of the flat summary table.
std::string report_csv_header();
std::string report_csv_row(const std::string& name, const MetricsReport& r);

/// Plain CSV of a matrix with a header of class names.
void save_matrix_csv(const std::filesystem::path& path, const std::vector<std::string>& classes,
                     const Matrix& m);
Matrix load_matrix_csv(const std::filesystem::path& path, std::vector<std::string>* classes);

}  // namespace hwm
