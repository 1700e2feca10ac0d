// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwmamba/random.hpp"
#include "hwmamba/tensor.hpp"

namespace hwm {

/// (e^x - 1) / x, with the removable singularity filled by its Taylor series
/// for |x| < 1e-4. Strictly positive for all real x.
double expm1_ratio(double x);
/// d/dx of expm1_ratio.
double expm1_ratio_derivative(double x);

/// Zero-order-hold transition for one channel at one step.
struct DiscreteStep {
  std::vector<double> a_bar;  // exp(delta * A), in (0, 1)
  std::vector<double> b_bar;  // expm1_ratio(delta * A) * delta * B
};

/// A: negative diagonal (length N), B: input projection (length N), delta > 0.
DiscreteStep discretize(std::span<const double> a, std::span<const double> b, double delta);

/// Selective SSM parameters for D channels with an N-dimensional diagonal state.
struct SsmParams {
  Tensor a_log;    // [D x N]; A = -exp(a_log)
  Tensor w_b;      // [N x D]
  Tensor w_c;      // [N x D]
  Tensor dt_down;  // [R x D]   low-rank timescale projection, applied first
  Tensor dt_up;    // [D x R]
  Tensor dt_bias;  // [D]
  Tensor d_skip;   // [D], undefined unless the skip term is enabled

  std::size_t channels() const { return dt_bias.dim(0); }
  std::size_t state_dim() const { return w_b.dim(0); }
  std::size_t rank() const { return dt_down.dim(0); }

  /// Initialization: a_log = log(1..N) per channel, softplus(dt_bias)
  /// log-uniform in [1e-3, 1e-1], projections truncated-normal(0.02).
  static SsmParams init(std::size_t channels, std::size_t state_dim, std::size_t rank, Rng& rng,
                        bool d_skip = false);

  /// Checks shape consistency among the tensors; throws DimensionError.
  void validate() const;

  std::vector<std::pair<std::string, Tensor>> named() const;
};

/// -exp(a_log): the strictly negative state matrix.
Tensor materialize_a(const SsmParams& p);

struct SelectiveProjection {
  Tensor b;      // [L x N]
  Tensor c;      // [L x N]
  Tensor delta;  // [L x D], strictly positive
};

/// Input-dependent B, C (bias-free) and delta = softplus(dt_bias + U(V x)).
/// Accepts one step [D] or a sequence [L x D].
SelectiveProjection selective_params(const Tensor& x, const SsmParams& p);

/// Fused selective recurrence with hand-written backward:
///   h_k = exp(delta_k A) * h_{k-1} + expm1_ratio(delta_k A) delta_k B_k x_k
///   y_k = C_k^T h_k
/// x, delta: [L x D]; a: [D x N]; b, c: [L x N]; h0: [D x N] or undefined (zero
/// state, not differentiated). The backward pass rebuilds states from
/// checkpoints every `checkpoint_every` steps. Scans with at most
/// `factor_cache_limit` elements (L*D*N) keep their per-step factors from the
/// forward pass; larger ones recompute them chunk by chunk.
Tensor selective_scan(const Tensor& x, const Tensor& delta, const Tensor& a, const Tensor& b,
                      const Tensor& c, const Tensor& h0 = {}, Tensor* final_state = nullptr,
                      std::size_t checkpoint_every = 64,
                      std::size_t factor_cache_limit = std::size_t{1} << 22);

/// S6 over a sequence X[L x D]. `final_state`, if given, receives h_L [D x N].
Tensor s6_scan(const Tensor& x, const SsmParams& p, const Tensor& h0 = {},
               Tensor* final_state = nullptr);

/// Forward-only S6 evaluated chunk by chunk with the state carried across
/// chunk boundaries.
Tensor s6_scan_chunked(const Tensor& x, const SsmParams& p, std::size_t chunk);

}  // namespace hwm
