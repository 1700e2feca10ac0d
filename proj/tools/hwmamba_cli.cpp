// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: preprocess, synth, train, eval, threshold, report.
// Exit codes: 0 success, 2 data error, 3 numeric error, 4 config error.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwmamba/errors.hpp"
#include "hwmamba/metrics.hpp"
#include "hwmamba/persist.hpp"
#include "hwmamba/pipeline.hpp"
#include "hwmamba/preprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hwm;

namespace {

constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitConfig = 4;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

WeightMatrix weights_for(const std::string& path, const std::vector<std::string>& classes) {
  if (path.empty()) return WeightMatrix::identity(classes);
  return WeightMatrix::load_csv(path, classes);
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
  std::string in, out;
  bool normalize = false;
  std::uint64_t seed = 0;
  std::size_t length = kTargetLength;
};

int run_preprocess(const PreprocessArgs& a) {
  const auto headers = list_records(a.in);
  if (headers.empty()) throw DataError("no records in " + a.in);
  fs::create_directories(a.out);
  for (const auto& h : headers) save_record(preprocess_record(load_record(h), a.length, a.normalize, a.seed), a.out);
  for (const char* extra : {"classes.json", "weights.csv"})
    if (fs::exists(fs::path(a.in) / extra))
      fs::copy_file(fs::path(a.in) / extra, fs::path(a.out) / extra, fs::copy_options::overwrite_existing);
  std::cout << "preprocessed " << headers.size() << " records into " << a.out << '\n';
  return 0;
}

struct SynthArgs {
  std::string out;
  SynthSpec spec;
};

int run_synth(const SynthArgs& a) {
  const Dataset data = synth_dataset(a.spec);
  save_dataset(data, a.out);
  WeightMatrix::identity(data.classes).save_csv(fs::path(a.out) / "weights.csv");
  std::cout << "wrote " << data.records.size() << " records over " << data.classes.size()
            << " classes to " << a.out << '\n';
  return 0;
}

struct TrainArgs {
  std::string data, config, out, preset;
  std::optional<std::size_t> fold;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  bool resume = false;
};

std::optional<fs::path> latest_checkpoint(const fs::path& dir) {
  std::optional<fs::path> best;
  if (!fs::is_directory(dir)) return best;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && e.path().filename().string().rfind("epoch_", 0) == 0 &&
        fs::exists(e.path() / "model.json"))
      if (!best || e.path().filename() > best->filename()) best = e.path();
  return best;
}

int run_train(const TrainArgs& a) {
  const Dataset data = load_dataset(a.data);
  TrainConfig cfg;
  if (a.preset == "micro") cfg.net = NetConfig::micro();
  else if (a.preset == "paper") cfg.net = NetConfig::paper();
  else if (!a.preset.empty()) throw ConfigError("unknown preset '" + a.preset + "'");
  cfg.net.num_classes = data.classes.size();
  if (!a.config.empty()) {
    const json j = read_json(a.config);
    from_json(j, cfg);
    if (cfg.net.num_classes != data.classes.size())
      throw ConfigError("config asks for " + std::to_string(cfg.net.num_classes) +
                        " classes but the dataset has " + std::to_string(data.classes.size()));
  }
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();

  const Matrix labels = data.targets();
  const Split split = stratified_split(labels, cfg.train_fraction, cfg.seed);
  std::vector<std::size_t> fit = split.train;
  json split_json{{"classes", data.classes},
                  {"train", data.ids(split.train)},
                  {"test", data.ids(split.test)}};
  if (a.fold) {
    if (*a.fold >= cfg.folds)
      throw ConfigError("--fold must lie in [0, " + std::to_string(cfg.folds) + ")");
    const auto folds = kfold(labels, split.train, cfg.folds, cfg.seed);
    fit = folds[*a.fold].train;
    split_json["fold"] = *a.fold;
    split_json["fit"] = data.ids(fit);
    split_json["val"] = data.ids(folds[*a.fold].test);
  }

  const fs::path out(a.out);
  fs::create_directories(out);
  write_json(out / "config.json", cfg);
  write_json(out / "split.json", split_json);

  TrainOptions options;
  options.checkpoint_dir = out / "checkpoints";
  options.meta = json{{"classes", data.classes}};
  if (a.resume) {
    if (auto ckpt = latest_checkpoint(*options.checkpoint_dir)) {
      options.resume = load_model(*ckpt);
      std::cout << "resuming from " << ckpt->string() << '\n';
    }
  }
  options.on_epoch = [&](const EpochLog& e) {
    std::cout << "epoch " << e.epoch << "/" << cfg.epochs << "  lr " << e.lr << "  loss " << e.loss
              << "  subset_acc " << e.subset_accuracy << "  hamming " << e.hamming_loss << "  ("
              << e.seconds << " s)" << std::endl;
  };
  TrainResult result = train_model(cfg, data, fit, options);
  ModelState final_state = capture(result.net, result.optimizer.step, &result.optimizer);
  final_state.meta = json{{"classes", data.classes}, {"epoch", cfg.epochs}, {"train_config", cfg}};
  save_model(final_state, out / "model");
  std::cout << "model written to " << (out / "model").string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string model, data, thresholds = "train", weights, report;
};

int run_eval(const EvalArgs& a) {
  fs::path model_dir(a.model), run_dir(a.model);
  if (!fs::exists(model_dir / "model.json")) model_dir /= "model";
  else run_dir = model_dir.parent_path();
  if (!fs::exists(model_dir / "model.json")) throw DataError("no model.json under " + a.model);
  const ModelState state = load_model(model_dir);
  HWMambaNet net(state.config);
  restore(state, net);

  const Dataset data = load_dataset(a.data);
  std::vector<std::size_t> test_rows, train_rows;
  if (fs::exists(run_dir / "split.json")) {
    const json split = read_json(run_dir / "split.json");
    const auto key = split.contains("val") ? "val" : "test";
    test_rows = data.rows_of(split.at(key).get<std::vector<std::string>>());
    train_rows = data.rows_of(split.at(split.contains("fit") ? "fit" : "train").get<std::vector<std::string>>());
  } else {
    test_rows.resize(data.records.size());
    for (std::size_t i = 0; i < test_rows.size(); ++i) test_rows[i] = i;
  }
  const WeightMatrix weights = weights_for(a.weights, data.classes);

  PredictionSet test{data.classes, predict(net, data, test_rows), data.targets(test_rows)};
  std::optional<PredictionSet> train;
  if (!train_rows.empty())
    train = PredictionSet{data.classes, predict(net, data, train_rows), data.targets(train_rows)};
  const MetricsReport report =
      evaluate_predictions(test, train ? &*train : nullptr, a.thresholds, weights);

  const fs::path report_path(a.report);
  write_json(report_path, report);
  const fs::path stem = report_path.parent_path() / report_path.stem();
  save_matrix_csv(stem.string() + "_test_probs.csv", data.classes, test.probs);
  save_matrix_csv(stem.string() + "_test_targets.csv", data.classes, test.targets);
  if (train) {
    save_matrix_csv(stem.string() + "_train_probs.csv", data.classes, train->probs);
    save_matrix_csv(stem.string() + "_train_targets.csv", data.classes, train->targets);
  }
  std::cout << render_reports({{report_path.stem().string(), report}}, "csv");
  return 0;
}

struct ThresholdArgs {
  std::string probs, targets, metric, out, weights;
};

int run_threshold(const ThresholdArgs& a) {
  std::vector<std::string> classes, target_classes;
  PredictionSet set;
  set.probs = load_matrix_csv(a.probs, &classes);
  set.targets = load_matrix_csv(a.targets, &target_classes);
  if (classes != target_classes) throw DataError("probability and target headers differ");
  set.classes = classes;
  set.validate();
  const Metric metric = parse_metric(a.metric);
  std::optional<WeightMatrix> weights;
  if (metric == Metric::ChallengeScore) weights = weights_for(a.weights, classes);
  const auto best = threshold_search(set, metric, weights ? &*weights : nullptr);
  json curve = json::array();
  for (double tau : threshold_grid()) {
    try {
      curve.push_back({{"tau", tau}, {"value", metric_at(metric, set, tau, weights ? &*weights : nullptr)}});
    } catch (const DataError&) {
      curve.push_back({{"tau", tau}, {"value", nullptr}});
    }
  }
  write_json(a.out, json{{"metric", metric_name(metric)}, {"tau", best.tau}, {"value", best.value}, {"grid", curve}});
  std::cout << metric_name(metric) << ": tau " << best.tau << " value " << best.value << '\n';
  return 0;
}

struct ReportArgs {
  std::string in, format = "csv";
};

int run_report(const ReportArgs& a) {
  if (!fs::is_directory(a.in)) throw DataError("not a directory: " + a.in);
  std::vector<std::pair<std::string, MetricsReport>> reports;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a.in))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    json j;
    try {
      std::ifstream in(f);
      j = json::parse(in);
    } catch (const json::exception&) {
      continue;
    }
    if (!j.is_object() || !j.contains("subset_accuracy") || !j.contains("per_class_f1")) continue;
    reports.emplace_back(fs::relative(f, a.in).replace_extension().string(), j.get<MetricsReport>());
  }
  std::cout << render_reports(reports, a.format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HWMamba ECG classification engine"};
  app.require_subcommand(1);

  PreprocessArgs pre;
  auto* c_pre = app.add_subcommand("preprocess", "Resample to 500 Hz and fix the record length");
  c_pre->add_option("--in", pre.in, "Input record directory")->required();
  c_pre->add_option("--out", pre.out, "Output record directory")->required();
  c_pre->add_flag("--normalize", pre.normalize, "Per-lead z-score after cropping");
  c_pre->add_option("--seed", pre.seed, "Seed for the random crop windows");
  c_pre->add_option("--length", pre.length, "Output length in samples")->check(CLI::PositiveNumber);

  SynthArgs syn;
  auto* c_syn = app.add_subcommand("synth", "Write a synthetic separable dataset");
  c_syn->add_option("--out", syn.out, "Output directory")->required();
  c_syn->add_option("--n", syn.spec.n, "Number of records")->required();
  c_syn->add_option("--classes", syn.spec.num_classes, "Number of classes (1..26)")->required();
  c_syn->add_option("--seq-len", syn.spec.seq_len, "Samples per lead")->required();
  c_syn->add_option("--seed", syn.spec.seed, "Generator seed")->required();
  c_syn->add_option("--noise", syn.spec.noise, "Noise standard deviation");

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a model on a record directory");
  c_tr->add_option("--data", tr.data, "Record directory")->required();
  c_tr->add_option("--config", tr.config, "TrainConfig JSON");
  c_tr->add_option("--out", tr.out, "Run directory")->required();
  c_tr->add_option("--preset", tr.preset, "micro or paper")->check(CLI::IsMember({"micro", "paper"}));
  c_tr->add_option("--fold", tr.fold, "Train on fold K (0-based) of the k-fold split");
  c_tr->add_option("--epochs", tr.epochs, "Override the epoch count");
  c_tr->add_option("--seed", tr.seed, "Override the seed");
  c_tr->add_flag("--resume", tr.resume, "Continue from the newest checkpoint in the run directory");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Score a trained model");
  c_ev->add_option("--model", ev.model, "Run or model directory")->required();
  c_ev->add_option("--data", ev.data, "Record directory")->required();
  c_ev->add_option("--thresholds", ev.thresholds, "train, test or a thresholds JSON file");
  c_ev->add_option("--weights", ev.weights, "Challenge weight matrix CSV (identity if omitted)");
  c_ev->add_option("--report", ev.report, "Report JSON path")->required();

  ThresholdArgs th;
  auto* c_th = app.add_subcommand("threshold", "Grid-search a global decision threshold");
  c_th->add_option("--probs", th.probs, "Probability CSV")->required();
  c_th->add_option("--targets", th.targets, "Target CSV")->required();
  c_th->add_option("--metric", th.metric, "Metric name")->required();
  c_th->add_option("--out", th.out, "Result JSON")->required();
  c_th->add_option("--weights", th.weights, "Weight matrix CSV for challenge_score");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Tabulate every metrics report under a run directory");
  c_rep->add_option("--in", rep.in, "Run directory")->required();
  c_rep->add_option("--format", rep.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (c_pre->parsed()) return run_preprocess(pre);
    if (c_syn->parsed()) return run_synth(syn);
    if (c_tr->parsed()) return run_train(tr);
    if (c_ev->parsed()) return run_eval(ev);
    if (c_th->parsed()) return run_threshold(th);
    if (c_rep->parsed()) return run_report(rep);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitConfig;
}
