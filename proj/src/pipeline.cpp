// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hwmamba/errors.hpp"

namespace hwm {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset

std::vector<std::string> all_classes() {
  return {kClassNames.begin(), kClassNames.end()};
}

std::vector<std::string> canonical_subset(const std::vector<std::string>& names) {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(class_index(n));
  std::sort(idx.begin(), idx.end());
  if (std::adjacent_find(idx.begin(), idx.end()) != idx.end())
    throw DataError("class list repeats an abbreviation");
  if (idx.empty()) throw DataError("class list is empty");
  std::vector<std::string> out;
  for (auto i : idx) out.emplace_back(kClassNames[i]);
  return out;
}

Matrix Dataset::targets(const std::vector<std::size_t>& rows) const {
  std::vector<std::size_t> cols;
  for (const auto& c : classes) cols.push_back(class_index(c));
  Matrix t(rows.size(), classes.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& rec = records.at(rows[r]);
    std::size_t seen = 0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      t(r, j) = rec.labels[cols[j]];
      seen += rec.labels[cols[j]];
    }
    const auto total = static_cast<std::size_t>(std::count(rec.labels.begin(), rec.labels.end(), 1));
    if (seen != total) throw DataError("record " + rec.id + " has a label outside the class list");
  }
  return t;
}

Matrix Dataset::targets() const {
  std::vector<std::size_t> rows(records.size());
  std::iota(rows.begin(), rows.end(), 0);
  return targets(rows);
}

std::vector<std::string> Dataset::ids(const std::vector<std::size_t>& rows) const {
  std::vector<std::string> out;
  for (auto r : rows) out.push_back(records.at(r).id);
  return out;
}

std::vector<std::size_t> Dataset::rows_of(const std::vector<std::string>& wanted) const {
  std::map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < records.size(); ++i) where[records[i].id] = i;
  std::vector<std::size_t> out;
  for (const auto& id : wanted) {
    auto it = where.find(id);
    if (it == where.end()) throw DataError("record id " + id + " is not in the dataset");
    out.push_back(it->second);
  }
  return out;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset data;
  const fs::path class_file = dir / "classes.json";
  if (fs::exists(class_file)) {
    std::ifstream in(class_file);
    try {
      data.classes = canonical_subset(json::parse(in).get<std::vector<std::string>>());
    } catch (const json::exception& e) {
      throw DataError(class_file.string() + ": " + e.what());
    }
  } else {
    data.classes = all_classes();
  }
  for (const auto& header : list_records(dir)) data.records.push_back(resample(load_record(header)));
  if (data.records.empty()) throw DataError("no records in " + dir.string());
  (void)data.targets();  // rejects labels outside the class list early
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& rec : data.records) save_record(rec, dir);
  std::ofstream(dir / "classes.json") << json(data.classes).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Splits

std::vector<std::vector<std::size_t>> stratify(const Matrix& labels,
                                               const std::vector<std::size_t>& rows,
                                               const std::vector<double>& ratios,
                                               std::uint64_t seed) {
  if (rows.empty()) throw DataError("stratify: no records");
  const std::size_t k = ratios.size(), c = labels.cols;
  Rng rng(seed);
  std::vector<std::size_t> order(rows);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> want(k);
  std::vector<std::vector<double>> want_label(k, std::vector<double>(c));
  std::vector<std::size_t> left(c, 0);
  for (auto r : order)
    for (std::size_t l = 0; l < c; ++l) left[l] += labels(r, l) > 0.5;
  for (std::size_t s = 0; s < k; ++s) {
    want[s] = ratios[s] * static_cast<double>(rows.size());
    for (std::size_t l = 0; l < c; ++l) want_label[s][l] = ratios[s] * static_cast<double>(left[l]);
  }

  std::vector<std::vector<std::size_t>> groups(k);
  std::vector<bool> placed(order.size(), false);
  auto pick = [&](auto&& key) {
    // Largest key wins; remaining ties are broken by the record-count demand,
    // then uniformly at random.
    std::vector<std::size_t> best;
    for (std::size_t s = 0; s < k; ++s) {
      if (best.empty() || key(s) > key(best[0])) best = {s};
      else if (key(s) == key(best[0])) best.push_back(s);
    }
    if (best.size() > 1) {
      std::vector<std::size_t> tied;
      for (auto s : best) {
        if (tied.empty() || want[s] > want[tied[0]]) tied = {s};
        else if (want[s] == want[tied[0]]) tied.push_back(s);
      }
      best = tied;
    }
    if (best.size() == 1) return best[0];
    return best[std::uniform_int_distribution<std::size_t>(0, best.size() - 1)(rng)];
  };
  auto place = [&](std::size_t i, std::size_t s) {
    const auto r = order[i];
    placed[i] = true;
    groups[s].push_back(r);
    want[s] -= 1;
    for (std::size_t l = 0; l < c; ++l)
      if (labels(r, l) > 0.5) {
        want_label[s][l] -= 1;
        left[l] -= 1;
      }
  };

  while (true) {
    std::size_t rarest = c;
    for (std::size_t l = 0; l < c; ++l)
      if (left[l] > 0 && (rarest == c || left[l] < left[rarest])) rarest = l;
    if (rarest == c) break;
    for (std::size_t i = 0; i < order.size(); ++i)
      if (!placed[i] && labels(order[i], rarest) > 0.5)
        place(i, pick([&](std::size_t s) { return want_label[s][rarest]; }));
  }
  for (std::size_t i = 0; i < order.size(); ++i)
    if (!placed[i]) place(i, pick([&](std::size_t s) { return want[s]; }));
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

Split stratified_split(const Matrix& labels, double train_fraction, std::uint64_t seed) {
  if (labels.rows < 2) throw DataError("stratified_split: need at least two records");
  std::vector<std::size_t> rows(labels.rows);
  std::iota(rows.begin(), rows.end(), 0);
  auto groups = stratify(labels, rows, {train_fraction, 1.0 - train_fraction}, seed);
  return {groups[0], groups[1]};
}

std::vector<Split> kfold(const Matrix& labels, const std::vector<std::size_t>& rows, std::size_t k,
                         std::uint64_t seed) {
  if (k < 2) throw ConfigError("kfold: k must be at least 2");
  if (k > rows.size())
    throw DataError("kfold: " + std::to_string(k) + " folds for " + std::to_string(rows.size()) +
                    " records");
  auto groups = stratify(labels, rows, std::vector<double>(k, 1.0 / static_cast<double>(k)), seed);
  std::vector<Split> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    folds[f].test = groups[f];
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) folds[f].train.insert(folds[f].train.end(), groups[g].begin(), groups[g].end());
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Synthetic data

std::vector<std::string> synth_class_list(std::size_t num_classes) {
  if (num_classes == 0 || num_classes > kNumClasses)
    throw ConfigError("synthetic class count must lie in [1, 26]");
  std::vector<std::string> out{"NSR"};
  for (auto name : kClassNames)
    if (name != "NSR" && out.size() < num_classes) out.emplace_back(name);
  out.resize(num_classes);
  return out;
}

std::vector<double> synth_signature(std::size_t k, std::size_t seq_len) {
  const double freq = 3.0 + 4.0 * static_cast<double>(k);
  const double phase = 0.7 * static_cast<double>(k);
  std::vector<double> s(kNumLeads * seq_len);
  for (std::size_t l = 0; l < kNumLeads; ++l) {
    // Each class drives its own subset of leads at full gain.
    const double gain = (l + k) % 3 == 0 ? 1.0 : 0.25;
    for (std::size_t t = 0; t < seq_len; ++t)
      s[l * seq_len + t] =
          gain * std::sin(2 * std::numbers::pi * freq * static_cast<double>(t) / kTargetFs + phase);
  }
  return s;
}

std::vector<double> synth_label_frequencies(const SynthSpec& spec) {
  // The label count is uniform on 1..m and the classes are a uniform subset.
  const std::size_t m = std::min(spec.max_labels, spec.num_classes);
  const double mean_count = (1.0 + static_cast<double>(m)) / 2.0;
  return std::vector<double>(spec.num_classes, mean_count / static_cast<double>(spec.num_classes));
}

Dataset synth_dataset(const SynthSpec& spec) {
  if (spec.n < spec.num_classes) throw ConfigError("synth: n must be at least the class count");
  if (spec.seq_len == 0) throw ConfigError("synth: seq_len must be positive");
  if (spec.max_labels == 0) throw ConfigError("synth: max_labels must be positive");
  if (!(spec.noise >= 0)) throw ConfigError("synth: noise must be non-negative");
  const auto names = synth_class_list(spec.num_classes);
  std::vector<std::vector<double>> sig;
  for (std::size_t k = 0; k < spec.num_classes; ++k) sig.push_back(synth_signature(k, spec.seq_len));

  Dataset data;
  data.classes = canonical_subset(names);
  const std::size_t m = std::min(spec.max_labels, spec.num_classes);
  for (std::size_t i = 0; i < spec.n; ++i) {
    Rng rng(mix_seed(spec.seed, i, 0x5e17));
    std::vector<std::size_t> active;
    if (i < spec.num_classes) {
      active = {i};
    } else {
      const auto count = std::uniform_int_distribution<std::size_t>(1, m)(rng);
      std::vector<std::size_t> all(spec.num_classes);
      std::iota(all.begin(), all.end(), 0);
      std::shuffle(all.begin(), all.end(), rng);
      active.assign(all.begin(), all.begin() + static_cast<long>(count));
    }
    EcgRecord rec;
    std::ostringstream id;
    id << "S" << std::setw(5) << std::setfill('0') << i;
    rec.id = id.str();
    rec.fs = kTargetFs;
    rec.num_samples = spec.seq_len;
    rec.signal.assign(kNumLeads * spec.seq_len, 0.0);
    for (auto k : active) {
      rec.labels[class_index(names[k])] = 1;
      for (std::size_t j = 0; j < rec.signal.size(); ++j) rec.signal[j] += sig[k][j];
    }
    if (spec.noise > 0) {
      std::normal_distribution<double> noise(0.0, spec.noise);
      for (double& v : rec.signal) v += noise(rng);
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

// ---------------------------------------------------------------------------
// Training

Tensor make_input(const EcgRecord& rec, std::size_t length, CropMode mode, Rng& rng,
                  bool normalize) {
  EcgRecord fixed = fix_length(rec, length, rng, mode);
  if (normalize) fixed = zscore(fixed);
  return Tensor({1, kNumLeads, length}, std::move(fixed.signal));
}

void to_json(json& j, const EpochLog& e) {
  j = json{{"epoch", e.epoch},
           {"lr", e.lr},
           {"loss", e.loss},
           {"subset_accuracy", e.subset_accuracy},
           {"hamming_loss", e.hamming_loss},
           {"seconds", e.seconds}};
}

void from_json(const json& j, EpochLog& e) {
  e.epoch = j.at("epoch").get<std::size_t>();
  e.lr = j.at("lr").get<double>();
  e.loss = j.at("loss").get<double>();
  e.subset_accuracy = j.at("subset_accuracy").get<double>();
  e.hamming_loss = j.at("hamming_loss").get<double>();
  e.seconds = j.value("seconds", 0.0);
}

namespace {

Tensor target_tensor(const Matrix& t, std::size_t row) {
  std::vector<double> v(t.values.begin() + static_cast<long>(row * t.cols),
                        t.values.begin() + static_cast<long>((row + 1) * t.cols));
  return Tensor({t.cols}, std::move(v));
}

std::string epoch_dir_name(std::size_t epoch) {
  std::ostringstream s;
  s << "epoch_" << std::setw(3) << std::setfill('0') << epoch;
  return s.str();
}

}  // namespace

TrainResult train_model(const TrainConfig& cfg, const Dataset& data,
                        const std::vector<std::size_t>& rows, const TrainOptions& options) {
  cfg.validate();
  if (rows.empty()) throw DataError("train: no training records");
  if (cfg.net.num_classes != data.classes.size())
    throw ConfigError("train: network has " + std::to_string(cfg.net.num_classes) +
                      " outputs but the dataset has " + std::to_string(data.classes.size()) +
                      " classes");
  const Matrix targets = data.targets(rows);

  TrainResult result{HWMambaNet(cfg.net, mix_seed(cfg.seed, 0x1e7)), AdamState{}, {}};
  auto params = result.net.named_parameters();
  for (auto& [name, p] : params) p.set_requires_grad(true);
  result.optimizer.init(params);
  std::size_t first_epoch = 0;
  if (options.resume) {
    restore(*options.resume, result.net);
    if (!options.resume->optimizer) throw DataError("resume: checkpoint has no optimizer state");
    result.optimizer = *options.resume->optimizer;
    if (!result.optimizer.matches(params)) throw DataError("resume: optimizer state does not fit");
    first_epoch = options.resume->meta.value("epoch", std::size_t{0});
  }
  const std::size_t last_epoch = std::min(cfg.epochs, options.stop_after.value_or(cfg.epochs));
  const std::size_t n = rows.size(), b = cfg.batch_size;
  const std::size_t batches = (n + b - 1) / b;
  if (options.checkpoint_dir) fs::create_directories(*options.checkpoint_dir);

  for (std::size_t epoch = first_epoch; epoch < last_epoch; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(mix_seed(cfg.seed, epoch, 0xe90c));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    EpochLog log;
    log.epoch = epoch + 1;
    log.lr = lr_at(cfg.schedule_epoch(static_cast<double>(epoch)), cfg);
    double loss_sum = 0.0;
    Matrix probs(n, targets.cols), seen(n, targets.cols);
    for (std::size_t bi = 0; bi < batches; ++bi) {
      for (auto& [name, p] : params) p.zero_grad();
      const std::size_t lo = bi * b, hi = std::min(n, lo + b);
      const double inv = 1.0 / static_cast<double>(hi - lo);
      double batch_loss = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const std::size_t local = order[i];
        const auto& rec = data.records[rows[local]];
        Rng crop(mix_seed(cfg.seed, epoch, fnv1a(rec.id)));
        Tensor x = make_input(rec, cfg.net.input_len, CropMode::Random, crop, cfg.net.normalize_input);
        Tensor logits = forward_logits(x, result.net);
        Tensor loss = bce_loss(logits, target_tensor(targets, local));
        backward(scale(loss, inv));
        batch_loss += loss.item() * inv;
        for (std::size_t c = 0; c < targets.cols; ++c) {
          probs(i, c) = sigmoid_scalar(logits[c]);
          seen(i, c) = targets(local, c);
        }
      }
      if (!std::isfinite(batch_loss))
        throw NumericError("non-finite loss in epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(bi));
      const double frac = static_cast<double>(epoch) + static_cast<double>(bi) / static_cast<double>(batches);
      adam_step(params, result.optimizer, lr_at(cfg.schedule_epoch(frac), cfg), cfg);
      loss_sum += batch_loss;
    }
    for (auto& [name, p] : params) p.zero_grad();
    log.loss = loss_sum / static_cast<double>(batches);
    const Matrix preds = binarize(probs, 0.5);
    log.subset_accuracy = subset_accuracy(preds, seen);
    log.hamming_loss = hamming_loss(preds, seen);
    log.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(log);

    if (options.checkpoint_dir) {
      ModelState state = capture(result.net, result.optimizer.step, &result.optimizer);
      state.meta = options.meta;
      state.meta["epoch"] = log.epoch;
      state.meta["classes"] = data.classes;
      state.meta["train_config"] = cfg;
      save_model(state, *options.checkpoint_dir / epoch_dir_name(log.epoch));
      std::ofstream(*options.checkpoint_dir / "train_log.jsonl", std::ios::app)
          << json(log).dump() << '\n';
    }
    if (options.on_epoch) options.on_epoch(log);
  }
  return result;
}

Matrix predict(const HWMambaNet& net, const Dataset& data, const std::vector<std::size_t>& rows) {
  NoGradGuard guard;
  const auto& cfg = net.config();
  if (cfg.num_classes != data.classes.size())
    throw ConfigError("predict: network has " + std::to_string(cfg.num_classes) +
                      " outputs but the dataset has " + std::to_string(data.classes.size()) +
                      " classes");
  Matrix probs(rows.size(), cfg.num_classes);
  Rng unused(0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Tensor x = make_input(data.records.at(rows[r]), cfg.input_len, CropMode::Center, unused,
                          cfg.normalize_input);
    Tensor p = forward(x, net);
    for (std::size_t c = 0; c < cfg.num_classes; ++c) probs(r, c) = p[c];
  }
  return probs;
}

std::map<Metric, double> calibrate_thresholds(const PredictionSet& calibration,
                                              const WeightMatrix& weights) {
  std::map<Metric, double> taus;
  for (Metric m : kThresholdMetrics) taus[m] = threshold_search(calibration, m, &weights).tau;
  return taus;
}

std::map<Metric, double> load_thresholds(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open thresholds file " + path.string());
  std::map<Metric, double> taus;
  try {
    const json j = json::parse(in);
    if (j.contains("metric") && j.contains("tau")) {
      const double tau = j.at("tau").get<double>();
      for (Metric m : kThresholdMetrics) taus[m] = tau;
      taus[parse_metric(j.at("metric").get<std::string>())] = tau;
    } else {
      const json& table = j.contains("thresholds") ? j.at("thresholds") : j;
      for (const auto& [name, tau] : table.items()) taus[parse_metric(name)] = tau.get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  for (Metric m : kThresholdMetrics) {
    if (!taus.count(m)) throw ConfigError(path.string() + ": no threshold for " + std::string(metric_name(m)));
    if (!(taus[m] >= 0 && taus[m] <= 1)) throw ConfigError(path.string() + ": thresholds must lie in [0, 1]");
  }
  return taus;
}

MetricsReport evaluate_predictions(const PredictionSet& test, const PredictionSet* train,
                                   const std::string& threshold_source, const WeightMatrix& weights) {
  std::map<Metric, double> taus;
  std::string source = threshold_source;
  if (threshold_source == "train") {
    if (!train) throw ConfigError("train-calibrated thresholds need a training split");
    taus = calibrate_thresholds(*train, weights);
  } else if (threshold_source == "test") {
    taus = calibrate_thresholds(test, weights);
  } else {
    taus = load_thresholds(threshold_source);
    source = "file";
  }
  MetricsReport report = evaluate_metrics(test, taus, weights);
  report.threshold_source = source;
  if (train) report.gaps = threshold_gap_report(*train, test, &weights);
  return report;
}

std::string render_reports(const std::vector<std::pair<std::string, MetricsReport>>& reports,
                           const std::string& format) {
  if (format != "csv" && format != "json") throw ConfigError("report format must be csv or json");
  if (reports.empty()) throw DataError("no metrics reports found");
  const std::vector<Metric> columns{Metric::SubsetAccuracy, Metric::ChallengeScore,
                                    Metric::HammingLoss,    Metric::F1Macro,
                                    Metric::F1Weighted,     Metric::Auroc};
  auto rows = reports;
  if (reports.size() > 1) {
    MetricsReport mean;
    mean.classes = reports.front().second.classes;
    mean.per_class_f1.assign(mean.classes.size(), 0.0);
    const double k = static_cast<double>(reports.size());
    for (const auto& [name, r] : reports) {
      if (r.classes != mean.classes) throw DataError("reports " + name + " use a different class list");
      mean.subset_accuracy += r.subset_accuracy / k;
      mean.challenge_score += r.challenge_score / k;
      mean.hamming_loss += r.hamming_loss / k;
      mean.f1_macro += r.f1_macro / k;
      mean.f1_weighted += r.f1_weighted / k;
      mean.auroc_macro += r.auroc_macro / k;
      for (std::size_t c = 0; c < mean.per_class_f1.size(); ++c) mean.per_class_f1[c] += r.per_class_f1[c] / k;
    }
    rows.emplace_back("mean", mean);
  }

  if (format == "json") {
    json table = json::array(), per_class = json::object(), gaps = json::array();
    for (const auto& [name, r] : rows) {
      json row{{"name", name}};
      for (Metric m : columns) row[std::string(metric_name(m))] = r.value(m);
      table.push_back(row);
      json f1 = json::object();
      for (std::size_t c = 0; c < r.classes.size(); ++c) f1[r.classes[c]] = r.per_class_f1[c];
      per_class[name] = f1;
      for (const auto& g : r.gaps) {
        json gj = g;
        gj["name"] = name;
        gaps.push_back(gj);
      }
    }
    return json{{"table", table}, {"per_class_f1", per_class}, {"threshold_gaps", gaps}}.dump(2) + "\n";
  }

  std::ostringstream out;
  out << std::setprecision(6);
  out << report_csv_header() << '\n';
  for (const auto& [name, r] : rows) out << report_csv_row(name, r) << '\n';
  out << '\n' << "class";
  for (const auto& [name, r] : rows) out << ',' << name;
  out << '\n';
  for (std::size_t c = 0; c < rows.front().second.classes.size(); ++c) {
    out << rows.front().second.classes[c];
    for (const auto& [name, r] : rows) out << ',' << r.per_class_f1[c];
    out << '\n';
  }
  out << '\n' << "name,metric,tau_train,tau_test,value_train_tau,value_test_tau,gap\n";
  for (const auto& [name, r] : rows)
    for (const auto& g : r.gaps)
      out << name << ',' << metric_name(g.metric) << ',' << g.tau_train << ',' << g.tau_test << ','
          << g.value_train_tau << ',' << g.value_test_tau << ',' << g.gap << '\n';
  return out.str();
}

}  // namespace hwm
