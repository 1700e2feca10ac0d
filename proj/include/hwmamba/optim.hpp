// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hwmamba/net.hpp"

namespace hwm {

/// Optimizer, schedule, split and run settings.
struct TrainConfig {
  double base_lr = 1e-3;
  double warmup_start_lr = 1e-5;
  double min_lr = 1e-6;
  double warmup_epochs = 5;
  double decay_epochs = 13;
  /// Epochs actually run; the warmup/decay shape is stretched to fit.
  std::size_t epochs = 18;
  std::size_t batch_size = 20;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-9;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  double train_fraction = 0.8;
  NetConfig net;

  double schedule_length() const { return warmup_epochs + decay_epochs; }
  /// Maps a run epoch in [0, epochs] onto the schedule's own axis.
  double schedule_epoch(double run_epoch) const;
  void validate() const;  // ConfigError
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys keep their defaults; `net` is merged the same way.
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Linear warmup from warmup_start_lr to base_lr over [0, W], then cosine
/// decay to min_lr over [W, W + D]. ParameterError outside that range.
double lr_at(double epoch, const TrainConfig& cfg);

/// First and second moments per parameter, in named_parameters() order.
struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::uint64_t step = 0;

  void init(const std::vector<std::pair<std::string, Tensor>>& params);
  bool matches(const std::vector<std::pair<std::string, Tensor>>& params) const;
};

/// One bias-corrected Adam update from the accumulated gradients. Leaves the
/// gradients in place. NumericError naming the parameter on a non-finite
/// gradient, before anything is modified.
void adam_step(const std::vector<std::pair<std::string, Tensor>>& params, AdamState& state,
               double lr, const TrainConfig& cfg);

}  // namespace hwm
