// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hwmamba/errors.hpp"

namespace hwm {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

class Tensor;

namespace detail {

// One recorded operation. Backward receives the gradient of the node's output
// and accumulates into the gradients of its inputs.
struct TapeNode {
  const char* op = "";
  std::vector<Tensor> inputs;
  std::function<void(std::span<const double>)> backward;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until first needed
  bool requires_grad = false;
  std::shared_ptr<TapeNode> grad_fn;
};

}  // namespace detail

/// Dense row-major tensor of doubles with an optional gradient buffer.
///
/// Tensor is a handle: copies share storage and graph history, like a
/// reference-counted array. Use clone() for an independent copy.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }
  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }
  static Tensor vector(std::initializer_list<double> v);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<double> data();
  std::span<const double> data() const;
  double operator[](std::size_t i) const { return data()[i]; }
  double item() const;

  bool requires_grad() const;
  Tensor& set_requires_grad(bool on = true);
  bool has_grad() const;
  /// Gradient buffer; zeros of the right shape if nothing accumulated yet.
  std::span<const double> grad() const;
  Tensor grad_tensor() const;
  void zero_grad();
  /// Mutable gradient buffer, allocated on demand.
  std::span<double> grad_buffer();

  bool is_leaf() const;
  const detail::TapeNode* grad_fn() const;

  /// Same values, no history, no gradient.
  Tensor detach() const;
  Tensor clone() const { return detach(); }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  friend Tensor make_result(Shape, std::vector<double>, const char*, std::vector<Tensor>,
                            std::function<void(std::span<const double>)>);
  friend void backward(const Tensor& root);
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Creates an op output; records a tape node when grad mode is on and any
/// input requires a gradient. The backward rule must not capture the output.
Tensor make_result(Shape shape, std::vector<double> data, const char* op,
                   std::vector<Tensor> inputs,
                   std::function<void(std::span<const double>)> backward_rule);

/// Reverse-mode sweep from a scalar root. Leaf gradients accumulate across
/// calls; intermediate gradients are recomputed each call.
void backward(const Tensor& root);

bool grad_enabled();

/// Disables graph recording for its lifetime (inference, finite differences).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Throws NumericError naming `what` if any value is NaN or infinite.
void check_finite(std::span<const double> values, const char* what);

}  // namespace hwm
