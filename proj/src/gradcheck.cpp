// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hwm {

namespace {

std::vector<std::size_t> pick_coords(std::size_t n, std::size_t max_coords, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (max_coords == 0 || max_coords >= n) return idx;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(max_coords);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double eval_scalar(const std::function<Tensor()>& f) {
  NoGradGuard guard;
  Tensor y = f();
  if (y.numel() != 1) throw ContractError("finite_diff_check: function must return a scalar");
  double v = y.item();
  if (!std::isfinite(v)) throw NumericError("finite_diff_check: non-finite evaluation");
  return v;
}

}  // namespace

double finite_diff_check_params(const std::function<Tensor()>& loss, std::vector<Tensor> params,
                                double step, std::size_t max_coords, std::uint64_t seed) {
  if (!(step > 0)) throw ParameterError("finite_diff_check: step must be positive");
  std::vector<bool> had(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    had[i] = params[i].requires_grad();
    params[i].set_requires_grad(true);
    params[i].zero_grad();
  }
  Tensor root = loss();
  if (root.numel() != 1) throw ContractError("finite_diff_check: function must return a scalar");
  if (!std::isfinite(root.item())) throw NumericError("finite_diff_check: non-finite evaluation");
  backward(root);

  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (auto& p : params) {
    auto analytic = p.grad();
    std::vector<double> a(analytic.begin(), analytic.end());
    auto values = p.data();
    for (auto i : pick_coords(p.numel(), max_coords, rng)) {
      const double orig = values[i];
      values[i] = orig + step;
      const double up = eval_scalar(loss);
      values[i] = orig - step;
      const double down = eval_scalar(loss);
      values[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, std::abs(a[i] - numeric) / std::max(1.0, std::abs(a[i])));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i].zero_grad();
    params[i].set_requires_grad(had[i]);
  }
  return worst;
}

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double step, std::size_t max_coords, std::uint64_t seed) {
  Tensor leaf = x.detach();
  return finite_diff_check_params([&] { return f(leaf); }, {leaf}, step, max_coords, seed);
}

}  // namespace hwm
