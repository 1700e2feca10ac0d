// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "hwmamba/tensor.hpp"

namespace hwm {

using Rng = std::mt19937_64;

/// Stable 64-bit FNV-1a; used to derive per-record streams from string ids.
std::uint64_t fnv1a(std::string_view s, std::uint64_t basis = 1469598103934665603ULL);

/// Mixes several integers into one seed (splitmix64 finalizer per step).
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

/// Normal(0, std) resampled until within +-2 std.
void fill_trunc_normal(Tensor& t, double std, Rng& rng);
void fill_uniform(Tensor& t, double lo, double hi, Rng& rng);
Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0);

}  // namespace hwm
