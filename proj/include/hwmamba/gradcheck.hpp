// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hwmamba/tensor.hpp"

namespace hwm {

/// Compares reverse-mode gradients against central differences.
///
/// Returns max over checked coordinates of |analytic - numeric| / max(1, |analytic|).
/// `max_coords` > 0 limits the check to that many coordinates per tensor,
/// drawn deterministically from `seed`; 0 checks every coordinate.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double step = 1e-5, std::size_t max_coords = 0, std::uint64_t seed = 0);

/// Same check over a set of leaf tensors that `loss` closes over (model
/// parameters). Perturbs the leaves in place and restores them.
double finite_diff_check_params(const std::function<Tensor()>& loss, std::vector<Tensor> params,
                                double step = 1e-5, std::size_t max_coords = 0,
                                std::uint64_t seed = 0);

}  // namespace hwm
