// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "hwmamba/tensor.hpp"

// Differentiable primitives. Broadcasting is limited to scalar-by-tensor and
// per-channel (last axis) affine forms; every other shape mix throws
// DimensionError.

namespace hwm {

// Scalar kernels shared by the tensor ops and the scan.
double sigmoid_scalar(double x);
double softplus_scalar(double x);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// x[m x in] * w[out x in]^T + b[out]; b may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
/// x[... x n] + b[n]
Tensor add_channel(const Tensor& x, const Tensor& b);
/// x[... x n] * v[n]
Tensor mul_channel(const Tensor& x, const Tensor& v);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

Tensor exp(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor silu(const Tensor& x);
Tensor softplus(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor sum(const Tensor& x, std::size_t axis);
Tensor mean(const Tensor& x);
Tensor mean(const Tensor& x, std::size_t axis);
/// [C x H x W] -> [C]
Tensor global_avg_pool(const Tensor& x);

/// Normalizes over the last axis, which must have extent `normalized_extent`.
Tensor layer_norm(const Tensor& x, std::size_t normalized_extent, const Tensor& gamma,
                  const Tensor& beta, double eps = 1e-5);

struct Conv2dOptions {
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
  std::size_t groups = 1;
};

/// Cross-correlation of x[Cin x H x W] with w[Cout x Cin/g x kH x kW], zero
/// padding. `bias` may be undefined.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, const Conv2dOptions& opt);
std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad);

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm);
/// out[i, :] = x[index[i], :] over the leading axis.
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& index);
/// Zero-fills [C x H x W] up to [C x H' x W'] at the bottom/right.
Tensor pad_end(const Tensor& x, std::size_t height, std::size_t width);
/// Stacks equally shaped tensors along a new leading axis.
Tensor stack(const std::vector<Tensor>& parts);

}  // namespace hwm
