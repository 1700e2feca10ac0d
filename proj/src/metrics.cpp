// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "hwmamba/errors.hpp"

namespace hwm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw DimensionError(std::string(what) + ": " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r\""));
    cell.erase(cell.find_last_not_of(" \t\r\"") + 1);
    out.push_back(cell);
  }
  return out;
}

double parse_real(const std::string& s, const fs::path& path) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ": '" + s + "' is not a number");
  }
}

}  // namespace

void PredictionSet::validate() const {
  require_same_shape(probs, targets, "PredictionSet");
  if (classes.size() != probs.cols)
    throw DimensionError("PredictionSet: " + std::to_string(classes.size()) + " class names for " +
                         std::to_string(probs.cols) + " columns");
  for (double p : probs.values)
    if (!(p >= 0.0 && p <= 1.0)) throw DataError("PredictionSet: probability outside [0,1]");
  for (double t : targets.values)
    if (t != 0.0 && t != 1.0) throw DataError("PredictionSet: target outside {0,1}");
}

WeightMatrix WeightMatrix::identity(const std::vector<std::string>& classes) {
  WeightMatrix m{classes, Matrix(classes.size(), classes.size())};
  for (std::size_t i = 0; i < classes.size(); ++i) m.w(i, i) = 1.0;
  return m;
}

WeightMatrix WeightMatrix::load_csv(const fs::path& path, const std::vector<std::string>& classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError(path.string() + ": header has no classes");
  std::vector<std::string> cols(header.begin() + 1, header.end());
  std::map<std::string, std::map<std::string, double>> table;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ": row '" + cells.front() + "' has the wrong width");
    for (std::size_t j = 0; j < cols.size(); ++j)
      table[cells[0]][cols[j]] = parse_real(cells[j + 1], path);
  }
  WeightMatrix m{classes, Matrix(classes.size(), classes.size())};
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = 0; j < classes.size(); ++j) {
      auto row = table.find(classes[i]);
      if (row == table.end() || !row->second.count(classes[j]))
        throw DataError(path.string() + ": no weight for (" + classes[i] + ", " + classes[j] + ")");
      m.w(i, j) = row->second.at(classes[j]);
    }
  m.validate();
  return m;
}

void WeightMatrix::save_csv(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "";
  for (const auto& c : classes) out << ',' << c;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < classes.size(); ++i) {
    out << classes[i];
    for (std::size_t j = 0; j < classes.size(); ++j) out << ',' << w(i, j);
    out << '\n';
  }
}

void WeightMatrix::validate() const {
  if (w.rows != classes.size() || w.cols != classes.size())
    throw DimensionError("WeightMatrix: shape does not match the class list");
  for (std::size_t i = 0; i < w.rows; ++i)
    for (std::size_t j = 0; j < w.cols; ++j) {
      const double v = w(i, j);
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("WeightMatrix: entries must lie in [0,1]");
      if (i == j && v != 1.0) throw DataError("WeightMatrix: diagonal entries must be 1");
    }
}

std::size_t WeightMatrix::normal_index() const {
  auto it = std::find(classes.begin(), classes.end(), "NSR");
  if (it == classes.end()) throw DataError("challenge score needs the NSR class");
  return static_cast<std::size_t>(it - classes.begin());
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::SubsetAccuracy: return "subset_accuracy";
    case Metric::ChallengeScore: return "challenge_score";
    case Metric::HammingLoss: return "hamming_loss";
    case Metric::F1Macro: return "f1_macro";
    case Metric::F1Weighted: return "f1_weighted";
    case Metric::Auroc: return "auroc_macro";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::SubsetAccuracy, Metric::ChallengeScore, Metric::HammingLoss,
                   Metric::F1Macro, Metric::F1Weighted, Metric::Auroc})
    if (metric_name(m) == name) return m;
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

bool lower_is_better(Metric m) { return m == Metric::HammingLoss; }

Matrix binarize(const Matrix& probs, double tau) {
  Matrix out(probs.rows, probs.cols);
  for (std::size_t i = 0; i < probs.values.size(); ++i)
    out.values[i] = probs.values[i] > tau ? 1.0 : 0.0;
  return out;
}

double subset_accuracy(const Matrix& preds, const Matrix& targets) {
  require_same_shape(preds, targets, "subset_accuracy");
  if (preds.rows == 0) throw DataError("subset_accuracy: no records");
  std::size_t exact = 0;
  for (std::size_t r = 0; r < preds.rows; ++r) {
    bool same = true;
    for (std::size_t c = 0; c < preds.cols && same; ++c) same = preds(r, c) == targets(r, c);
    exact += same;
  }
  return static_cast<double>(exact) / static_cast<double>(preds.rows);
}

double hamming_loss(const Matrix& preds, const Matrix& targets) {
  require_same_shape(preds, targets, "hamming_loss");
  if (preds.values.empty()) throw DataError("hamming_loss: no labels");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < preds.values.size(); ++i) wrong += preds.values[i] != targets.values[i];
  return static_cast<double>(wrong) / static_cast<double>(preds.values.size());
}

F1Scores f1_scores(const Matrix& preds, const Matrix& targets) {
  require_same_shape(preds, targets, "f1_scores");
  F1Scores out;
  out.per_class.assign(preds.cols, 0.0);
  double weighted = 0.0, support_total = 0.0;
  for (std::size_t c = 0; c < preds.cols; ++c) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < preds.rows; ++r) {
      const bool p = preds(r, c) > 0.5, t = targets(r, c) > 0.5;
      tp += p && t;
      fp += p && !t;
      fn += !p && t;
    }
    const double denom = 2 * tp + fp + fn;
    out.per_class[c] = tp > 0 ? 2 * tp / denom : 0.0;
    const double support = tp + fn;
    weighted += out.per_class[c] * support;
    support_total += support;
  }
  out.macro = preds.cols ? std::accumulate(out.per_class.begin(), out.per_class.end(), 0.0) /
                               static_cast<double>(preds.cols)
                         : 0.0;
  if (support_total > 0) out.weighted = weighted / support_total;
  return out;
}

double f1_weighted(const Matrix& preds, const Matrix& targets) {
  auto f = f1_scores(preds, targets).weighted;
  if (!f) throw DataError("weighted F1 is undefined without positive targets");
  return *f;
}

Matrix challenge_confusion(const Matrix& preds, const Matrix& targets) {
  require_same_shape(preds, targets, "challenge_confusion");
  const auto c = preds.cols;
  Matrix a(c, c);
  for (std::size_t r = 0; r < preds.rows; ++r) {
    std::size_t uni = 0;
    for (std::size_t k = 0; k < c; ++k) uni += (preds(r, k) > 0.5) || (targets(r, k) > 0.5);
    const double norm = static_cast<double>(std::max<std::size_t>(uni, 1));
    for (std::size_t j = 0; j < c; ++j) {
      if (targets(r, j) <= 0.5) continue;
      for (std::size_t k = 0; k < c; ++k)
        if (preds(r, k) > 0.5) a(j, k) += 1.0 / norm;
    }
  }
  return a;
}

namespace {

// Weighted pair sums grouped by union size: bucket[u] = sum of w over the
// (true, predicted) pairs of every record whose union has u labels.
std::vector<double> union_buckets(const Matrix& preds, const Matrix& targets, const Matrix& w) {
  std::vector<double> bucket(preds.cols + 1, 0.0);
  for (std::size_t r = 0; r < preds.rows; ++r) {
    std::size_t uni = 0;
    for (std::size_t k = 0; k < preds.cols; ++k) uni += (preds(r, k) > 0.5) || (targets(r, k) > 0.5);
    double s = 0.0;
    for (std::size_t j = 0; j < preds.cols; ++j) {
      if (targets(r, j) <= 0.5) continue;
      for (std::size_t k = 0; k < preds.cols; ++k)
        if (preds(r, k) > 0.5) s += w(j, k);
    }
    bucket[std::max<std::size_t>(uni, 1)] += s;
  }
  return bucket;
}

// Scores multiplied by a common multiple of every union size, so that sums of
// short binary fractions stay exact instead of accumulating thirds and fifths.
double scaled_score(const std::vector<double>& bucket, double common) {
  double s = 0.0;
  for (std::size_t u = 1; u < bucket.size(); ++u)
    if (bucket[u] != 0.0) s += bucket[u] * (common / static_cast<double>(u));
  return s;
}

double common_multiple(std::size_t classes) {
  std::uint64_t l = 1;
  for (std::uint64_t u = 2; u <= classes; ++u) {
    const std::uint64_t next = std::lcm(l, u);
    if (next > (std::uint64_t{1} << 40)) return 1.0;
    l = next;
  }
  return static_cast<double>(l);
}

}  // namespace

double challenge_score(const Matrix& preds, const Matrix& targets, const WeightMatrix& weights) {
  require_same_shape(preds, targets, "challenge_score");
  if (weights.classes.size() != preds.cols)
    throw DimensionError("challenge_score: weight matrix does not match the class count");
  const std::size_t normal = weights.normal_index();
  Matrix inactive(preds.rows, preds.cols);
  for (std::size_t r = 0; r < preds.rows; ++r) inactive(r, normal) = 1.0;
  const double l = common_multiple(preds.cols);
  const double s = scaled_score(union_buckets(preds, targets, weights.w), l);
  const double s_true = scaled_score(union_buckets(targets, targets, weights.w), l);
  const double s_inactive = scaled_score(union_buckets(inactive, targets, weights.w), l);
  if (s_true == s_inactive)
    throw DataError("challenge_score: perfect and always-normal predictors score the same");
  return (s - s_inactive) / (s_true - s_inactive);
}

std::optional<double> auroc_binary(const std::vector<double>& scores,
                                   const std::vector<double>& labels) {
  if (scores.size() != labels.size()) throw DimensionError("auroc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] > 0.5) {
      pos += 1;
      rank_sum += rank[i];
    }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

double auroc_macro(const Matrix& probs, const Matrix& targets) {
  require_same_shape(probs, targets, "auroc_macro");
  double total = 0.0;
  std::size_t used = 0;
  std::vector<double> s(probs.rows), t(probs.rows);
  for (std::size_t c = 0; c < probs.cols; ++c) {
    for (std::size_t r = 0; r < probs.rows; ++r) {
      s[r] = probs(r, c);
      t[r] = targets(r, c);
    }
    if (auto a = auroc_binary(s, t)) {
      total += *a;
      ++used;
    }
  }
  if (used == 0) throw DataError("auroc_macro: no class has both outcomes");
  return total / static_cast<double>(used);
}

double metric_at(Metric m, const PredictionSet& set, double tau, const WeightMatrix* weights) {
  const Matrix preds = binarize(set.probs, tau);
  switch (m) {
    case Metric::SubsetAccuracy: return subset_accuracy(preds, set.targets);
    case Metric::HammingLoss: return hamming_loss(preds, set.targets);
    case Metric::F1Macro: return f1_scores(preds, set.targets).macro;
    case Metric::F1Weighted: return f1_weighted(preds, set.targets);
    case Metric::ChallengeScore: {
      if (weights) return challenge_score(preds, set.targets, *weights);
      return challenge_score(preds, set.targets, WeightMatrix::identity(set.classes));
    }
    case Metric::Auroc: break;
  }
  throw ConfigError("metric_at: " + std::string(metric_name(m)) + " has no threshold");
}

std::vector<double> threshold_grid() {
  std::vector<double> g(51);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = static_cast<double>(i) / 50.0;
  return g;
}

ThresholdResult threshold_search(const PredictionSet& set, Metric m, const WeightMatrix* weights) {
  if (m == Metric::Auroc) throw ConfigError("threshold_search: AUROC is threshold-free");
  set.validate();
  ThresholdResult best;
  bool first = true;
  for (double tau : threshold_grid()) {
    const double v = metric_at(m, set, tau, weights);
    const bool better = lower_is_better(m) ? v < best.value : v > best.value;
    if (first || better) {
      best = {tau, v};
      first = false;
    }
  }
  return best;
}

std::vector<GapRow> threshold_gap_report(const PredictionSet& train, const PredictionSet& test,
                                         const WeightMatrix* weights) {
  if (train.probs.rows == 0 || test.probs.rows == 0)
    throw DataError("threshold_gap_report: both splits must be non-empty");
  std::vector<GapRow> rows;
  for (Metric m : kThresholdMetrics) {
    GapRow row{m};
    row.tau_train = threshold_search(train, m, weights).tau;
    const auto on_test = threshold_search(test, m, weights);
    row.tau_test = on_test.tau;
    row.value_test_tau = on_test.value;
    row.value_train_tau = metric_at(m, test, row.tau_train, weights);
    row.gap = std::abs(row.value_test_tau - row.value_train_tau);
    rows.push_back(row);
  }
  return rows;
}

double MetricsReport::value(Metric m) const {
  switch (m) {
    case Metric::SubsetAccuracy: return subset_accuracy;
    case Metric::ChallengeScore: return challenge_score;
    case Metric::HammingLoss: return hamming_loss;
    case Metric::F1Macro: return f1_macro;
    case Metric::F1Weighted: return f1_weighted;
    case Metric::Auroc: return auroc_macro;
  }
  return 0.0;
}

MetricsReport evaluate_metrics(const PredictionSet& set, const std::map<Metric, double>& taus,
                               const WeightMatrix& weights) {
  set.validate();
  MetricsReport r;
  r.classes = set.classes;
  auto tau = [&](Metric m) {
    auto it = taus.find(m);
    if (it == taus.end())
      throw ConfigError("no threshold for " + std::string(metric_name(m)));
    r.thresholds_used[std::string(metric_name(m))] = it->second;
    return it->second;
  };
  r.subset_accuracy = metric_at(Metric::SubsetAccuracy, set, tau(Metric::SubsetAccuracy), &weights);
  r.challenge_score = metric_at(Metric::ChallengeScore, set, tau(Metric::ChallengeScore), &weights);
  r.hamming_loss = metric_at(Metric::HammingLoss, set, tau(Metric::HammingLoss), &weights);
  r.f1_macro = metric_at(Metric::F1Macro, set, tau(Metric::F1Macro), &weights);
  const double tw = tau(Metric::F1Weighted);
  r.f1_weighted = metric_at(Metric::F1Weighted, set, tw, &weights);
  r.per_class_f1 = f1_scores(binarize(set.probs, tau(Metric::F1Macro)), set.targets).per_class;
  r.auroc_macro = auroc_macro(set.probs, set.targets);
  return r;
}

void to_json(json& j, const GapRow& r) {
  j = json{{"metric", metric_name(r.metric)}, {"tau_train", r.tau_train},
           {"tau_test", r.tau_test},          {"value_train_tau", r.value_train_tau},
           {"value_test_tau", r.value_test_tau}, {"gap", r.gap}};
}

void from_json(const json& j, GapRow& r) {
  r.metric = parse_metric(j.at("metric").get<std::string>());
  r.tau_train = j.at("tau_train").get<double>();
  r.tau_test = j.at("tau_test").get<double>();
  r.value_train_tau = j.at("value_train_tau").get<double>();
  r.value_test_tau = j.at("value_test_tau").get<double>();
  r.gap = j.at("gap").get<double>();
}

void to_json(json& j, const MetricsReport& r) {
  json per_class = json::object();
  for (std::size_t i = 0; i < r.classes.size() && i < r.per_class_f1.size(); ++i)
    per_class[r.classes[i]] = r.per_class_f1[i];
  j = json{{"classes", r.classes},
           {"subset_accuracy", r.subset_accuracy},
           {"challenge_score", r.challenge_score},
           {"hamming_loss", r.hamming_loss},
           {"f1_macro", r.f1_macro},
           {"f1_weighted", r.f1_weighted},
           {"auroc_macro", r.auroc_macro},
           {"per_class_f1", per_class},
           {"thresholds_used", r.thresholds_used},
           {"threshold_source", r.threshold_source},
           {"threshold_gaps", r.gaps}};
}

void from_json(const json& j, MetricsReport& r) {
  try {
    r.classes = j.at("classes").get<std::vector<std::string>>();
    r.subset_accuracy = j.at("subset_accuracy").get<double>();
    r.challenge_score = j.at("challenge_score").get<double>();
    r.hamming_loss = j.at("hamming_loss").get<double>();
    r.f1_macro = j.at("f1_macro").get<double>();
    r.f1_weighted = j.at("f1_weighted").get<double>();
    r.auroc_macro = j.at("auroc_macro").get<double>();
    r.per_class_f1.clear();
    const auto& per_class = j.at("per_class_f1");
    for (const auto& c : r.classes) r.per_class_f1.push_back(per_class.at(c).get<double>());
    r.thresholds_used = j.at("thresholds_used").get<std::map<std::string, double>>();
    r.threshold_source = j.at("threshold_source").get<std::string>();
    r.gaps = j.value("threshold_gaps", json::array()).get<std::vector<GapRow>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("metrics report: ") + e.what());
  }
}

std::string report_csv_header() {
  return "name,subset_accuracy,challenge_score,hamming_loss,f1_macro,f1_weighted,auroc_macro";
}

std::string report_csv_row(const std::string& name, const MetricsReport& r) {
  std::ostringstream out;
  out << std::setprecision(10) << name << ',' << r.subset_accuracy << ',' << r.challenge_score
      << ',' << r.hamming_loss << ',' << r.f1_macro << ',' << r.f1_weighted << ','
      << r.auroc_macro;
  return out.str();
}

void save_matrix_csv(const fs::path& path, const std::vector<std::string>& classes,
                     const Matrix& m) {
  if (classes.size() != m.cols) throw DimensionError("save_matrix_csv: header width");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t c = 0; c < classes.size(); ++c) out << (c ? "," : "") << classes[c];
  out << '\n' << std::setprecision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

Matrix load_matrix_csv(const fs::path& path, std::vector<std::string>* classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  auto header = split_csv_line(line);
  if (classes) *classes = header;
  Matrix m(0, header.size());
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw DataError(path.string() + ": ragged row");
    for (const auto& c : cells) m.values.push_back(parse_real(c, path));
    ++m.rows;
  }
  return m;
}

}  // namespace hwm
