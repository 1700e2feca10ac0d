// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/optim.hpp"

#include <cmath>
#include <numbers>

#include "hwmamba/errors.hpp"

namespace hwm {

using nlohmann::json;

double TrainConfig::schedule_epoch(double run_epoch) const {
  return run_epoch * schedule_length() / static_cast<double>(epochs);
}

void TrainConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(base_lr, "base_lr");
  positive(warmup_start_lr, "warmup_start_lr");
  positive(min_lr, "min_lr");
  positive(eps, "eps");
  if (!(min_lr < base_lr)) throw ConfigError("min_lr must be below base_lr");
  if (warmup_epochs < 0 || decay_epochs < 0 || schedule_length() <= 0)
    throw ConfigError("warmup_epochs and decay_epochs must be non-negative with a positive sum");
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw ConfigError("betas must lie in [0, 1)");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (!(train_fraction > 0 && train_fraction < 1)) throw ConfigError("train_fraction must lie in (0, 1)");
  net.validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"base_lr", c.base_lr},
           {"warmup_start_lr", c.warmup_start_lr},
           {"min_lr", c.min_lr},
           {"warmup_epochs", c.warmup_epochs},
           {"decay_epochs", c.decay_epochs},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"beta1", c.beta1},
           {"beta2", c.beta2},
           {"eps", c.eps},
           {"seed", c.seed},
           {"folds", c.folds},
           {"train_fraction", c.train_fraction},
           {"net", c.net}};
}

void from_json(const json& j, TrainConfig& c) {
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("base_lr", c.base_lr);
    get("warmup_start_lr", c.warmup_start_lr);
    get("min_lr", c.min_lr);
    get("warmup_epochs", c.warmup_epochs);
    get("decay_epochs", c.decay_epochs);
    get("epochs", c.epochs);
    get("batch_size", c.batch_size);
    get("beta1", c.beta1);
    get("beta2", c.beta2);
    get("eps", c.eps);
    get("seed", c.seed);
    get("folds", c.folds);
    get("train_fraction", c.train_fraction);
    if (j.contains("net")) from_json(j.at("net"), c.net);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
}

double lr_at(double epoch, const TrainConfig& cfg) {
  const double w = cfg.warmup_epochs, total = cfg.schedule_length();
  if (!(epoch >= 0 && epoch <= total))
    throw ParameterError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                         std::to_string(total) + "]");
  // std::lerp is exact at both ends, so epochs 0, W and W + D hit their rates exactly.
  if (epoch <= w && w > 0) return std::lerp(cfg.warmup_start_lr, cfg.base_lr, epoch / w);
  const double progress = (epoch - w) / cfg.decay_epochs;
  return std::lerp(cfg.min_lr, cfg.base_lr, 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void AdamState::init(const std::vector<std::pair<std::string, Tensor>>& params) {
  m.clear();
  v.clear();
  for (const auto& [name, p] : params) {
    m.emplace_back(p.numel(), 0.0);
    v.emplace_back(p.numel(), 0.0);
  }
  step = 0;
}

bool AdamState::matches(const std::vector<std::pair<std::string, Tensor>>& params) const {
  if (m.size() != params.size() || v.size() != params.size()) return false;
  for (std::size_t i = 0; i < params.size(); ++i)
    if (m[i].size() != params[i].second.numel() || v[i].size() != params[i].second.numel())
      return false;
  return true;
}

void adam_step(const std::vector<std::pair<std::string, Tensor>>& params, AdamState& state,
               double lr, const TrainConfig& cfg) {
  if (!(lr > 0)) throw ParameterError("adam_step: lr must be positive");
  if (state.m.empty() && !params.empty()) state.init(params);
  if (!state.matches(params)) throw DimensionError("adam_step: optimizer state does not match");
  for (const auto& [name, p] : params)
    for (double g : p.grad())
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in " + name);

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor p = params[i].second;
    auto g = p.grad();
    auto w = p.data();
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      w[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.eps);
    }
  }
}

}  // namespace hwm
