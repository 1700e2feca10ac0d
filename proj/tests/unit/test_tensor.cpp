// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "hwmamba/gradcheck.hpp"
#include "hwmamba/ops.hpp"
#include "hwmamba/random.hpp"
#include "oracles/grad_cases.hpp"

using namespace hwm;

namespace {

void check_close(std::span<const double> got, std::initializer_list<double> want, double tol) {
  REQUIRE(got.size() == want.size());
  std::size_t i = 0;
  for (double w : want) CHECK(std::abs(got[i++] - w) <= tol);
}

}  // namespace

TEST_CASE("matmul values and errors") {
  auto id = Tensor::matrix({{1, 0}, {0, 1}});
  auto m = Tensor::matrix({{1, 2}, {3, 4}});
  auto y = matmul(id, m);
  CHECK(std::vector<double>(y.data().begin(), y.data().end()) == std::vector<double>{1, 2, 3, 4});

  auto r = matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{3}, {4}}));
  CHECK(r.shape() == Shape{1, 1});
  CHECK(r.item() == 11.0);

  CHECK_THROWS_AS(matmul(Tensor::matrix({{1, 2}}), Tensor::matrix({{1, 2}})), DimensionError);
}

TEST_CASE("matmul gradient w.r.t. the left factor") {
  auto a = Tensor::matrix({{1, 1}});
  a.set_requires_grad();
  auto b = Tensor::matrix({{2}, {5}});
  backward(sum(matmul(a, b)));
  check_close(a.grad(), {2, 5}, 1e-12);
  CHECK(finite_diff_check([&](const Tensor& x) { return sum(matmul(x, b)); }, a) < 1e-9);
}

TEST_CASE("conv2d values, shapes and errors") {
  Rng rng(3);
  auto x = random_tensor({1, 4, 5}, rng);
  auto y = conv2d(x, Tensor::ones({1, 1, 1, 1}), {}, {});
  CHECK(y.shape() == x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y[i] == x[i]);

  auto s = conv2d(Tensor({1, 2, 2}, {1, 2, 3, 4}), Tensor::ones({1, 1, 2, 2}), {}, {});
  CHECK(s.shape() == Shape{1, 1, 1});
  CHECK(s.item() == 10.0);

  {
    NoGradGuard ng;
    auto big = conv2d(Tensor::zeros({1, 12, 8192}), Tensor::zeros({48, 1, 3, 16}), {},
                      Conv2dOptions{1, 16, 1, 0, 1});
    CHECK(big.shape() == Shape{48, 12, 512});
  }

  CHECK_THROWS_AS(conv2d(Tensor::zeros({3, 4, 4}), Tensor::zeros({2, 1, 3, 3}), {},
                         Conv2dOptions{1, 1, 0, 0, 2}),
                  DimensionError);
  CHECK_THROWS_AS(conv2d(Tensor::zeros({1, 2, 2}), Tensor::zeros({1, 1, 3, 3}), {}, {}),
                  DimensionError);
}

TEST_CASE("depthwise conv2d equals per-channel brute-force correlation") {
  Rng rng(11);
  const std::size_t C = 3, H = 5, W = 6, K = 3;
  auto x = random_tensor({C, H, W}, rng);
  auto w = random_tensor({C, 1, K, K}, rng);
  auto y = conv2d(x, w, {}, Conv2dOptions{1, 1, 1, 1, C});
  REQUIRE(y.shape() == Shape{C, H, W});
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t i = 0; i < H; ++i)
      for (std::size_t j = 0; j < W; ++j) {
        double acc = 0;
        for (std::size_t a = 0; a < K; ++a)
          for (std::size_t b = 0; b < K; ++b) {
            long ii = static_cast<long>(i + a) - 1, jj = static_cast<long>(j + b) - 1;
            if (ii < 0 || jj < 0 || ii >= long(H) || jj >= long(W)) continue;
            acc += x[(c * H + ii) * W + jj] * w[(c * K + a) * K + b];
          }
        CHECK(y[(c * H + i) * W + j] == acc);
      }
}

TEST_CASE("layer_norm") {
  auto g = Tensor::ones({2}), b = Tensor::zeros({2});
  auto flat = layer_norm(Tensor::matrix({{4, 4}}), 2, g, b, 1e-5);
  CHECK(flat[0] == 0.0);
  CHECK(flat[1] == 0.0);

  auto y = layer_norm(Tensor::vector({1, 3}), 2, g, b, 1e-12);
  check_close(y.data(), {-1, 1}, 1e-6);

  auto collapsed = layer_norm(Tensor::vector({1, 3}), 2, Tensor::zeros({2}),
                              Tensor::vector({5, 5}), 1e-5);
  check_close(collapsed.data(), {5, 5}, 0);

  CHECK_THROWS_AS(layer_norm(Tensor::vector({1, 3}), 2, g, b, 0.0), ParameterError);
  CHECK_THROWS_AS(layer_norm(Tensor::vector({1, 3, 4}), 2, g, b, 1e-5), DimensionError);

  Rng rng(5);
  auto x = random_tensor({7, 9}, rng, -3, 3);
  auto z = layer_norm(x, 9, Tensor::ones({9}), Tensor::zeros({9}), 1e-12);
  for (std::size_t r = 0; r < 7; ++r) {
    double mu = 0, var = 0;
    for (std::size_t i = 0; i < 9; ++i) mu += z[r * 9 + i];
    mu /= 9;
    for (std::size_t i = 0; i < 9; ++i) var += (z[r * 9 + i] - mu) * (z[r * 9 + i] - mu);
    var /= 9;
    CHECK(std::abs(mu) < 1e-9);
    CHECK(std::abs(var - 1) < 1e-6);
  }
}

TEST_CASE("activations") {
  CHECK(sigmoid(Tensor::scalar(0)).item() == 0.5);
  CHECK(std::abs(softplus(Tensor::scalar(0)).item() - 0.6931471805599453) < 1e-6);
  CHECK(std::abs(softplus(Tensor::scalar(50)).item() - 50.0) < 1e-9);
  CHECK(silu(Tensor::scalar(0)).item() == 0.0);
  for (double v : {-800.0, -40.0, 40.0, 800.0}) {
    CHECK(std::isfinite(sigmoid(Tensor::scalar(v)).item()));
    CHECK(std::isfinite(softplus(Tensor::scalar(v)).item()));
    CHECK(std::isfinite(silu(Tensor::scalar(v)).item()));
  }
}

TEST_CASE("reductions") {
  auto pooled = global_avg_pool(Tensor({3, 2, 2}, 3.0));
  check_close(pooled.data(), {3, 3, 3}, 0);
  CHECK(global_avg_pool(Tensor({1, 2, 2}, {1, 2, 3, 4})).item() == 2.5);

  auto m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  check_close(sum(m, 0).data(), {5, 7, 9}, 0);
  check_close(sum(m, 1).data(), {6, 15}, 0);
  check_close(mean(m, 1).data(), {2, 5}, 0);
  CHECK_THROWS_AS(sum(m, 2), ParameterError);
}

TEST_CASE("backward rules") {
  Rng rng(1);
  auto x = random_tensor({5}, rng);
  x.set_requires_grad();
  backward(sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);

  auto v = Tensor::vector({1, -2});
  v.set_requires_grad();
  backward(sum(mul(v, v)));
  check_close(v.grad(), {2, -4}, 0);

  auto z = Tensor::scalar(0);
  z.set_requires_grad();
  backward(sigmoid(z));
  CHECK(z.grad()[0] == 0.25);

  CHECK_THROWS_AS(backward(mul(v, v)), ContractError);
}

TEST_CASE("repeated backward accumulates into leaves") {
  auto x = Tensor::vector({1, 2});
  x.set_requires_grad();
  auto root = sum(scale(x, 3.0));
  backward(root);
  backward(root);
  check_close(x.grad(), {6, 6}, 0);
  x.zero_grad();
  check_close(x.grad(), {0, 0}, 0);
}

TEST_CASE("a tensor feeding two consumers sums both contributions") {
  Rng rng(2);
  auto x = random_tensor({4}, rng);
  auto f = [](const Tensor& t) { return sum(add(mul(t, t), sigmoid(t))); };
  Tensor leaf = x.detach();
  leaf.set_requires_grad();
  backward(f(leaf));
  for (std::size_t i = 0; i < 4; ++i) {
    double s = 1.0 / (1.0 + std::exp(-x[i]));
    CHECK(std::abs(leaf.grad()[i] - (2 * x[i] + s * (1 - s))) < 1e-12);
  }
  CHECK(finite_diff_check(f, x) < 1e-8);
}

TEST_CASE("finite_diff_check reference cases") {
  Rng rng(9);
  auto x = random_tensor({6}, rng, -2, 2);
  CHECK(finite_diff_check([](const Tensor& t) { return sum(mul(t, t)); }, x, 1e-5) < 1e-6);
  CHECK(finite_diff_check([](const Tensor&) { return Tensor::scalar(4.0); }, x, 1e-5) == 0.0);
  CHECK_THROWS_AS(finite_diff_check([](const Tensor& t) { return sum(t); }, x, 0.0),
                  ParameterError);
}

TEST_CASE("every differentiable primitive passes the finite-difference oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (const auto& [name, err] : oracle::primitive_gradient_errors(seed)) {
      INFO(name << " seed " << seed);
      CHECK(err < 1e-4);
    }
}

TEST_CASE("broadcasting is limited to per-channel forms") {
  CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3})), DimensionError);
  CHECK_THROWS_AS(mul(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), DimensionError);
  CHECK_THROWS_AS(add_channel(Tensor::zeros({2, 3}), Tensor::zeros({2})), DimensionError);
  CHECK_THROWS_AS(reshape(Tensor::zeros({2, 3}), {4}), DimensionError);
}

TEST_CASE("non-finite values are errors") {
  CHECK_THROWS_AS(exp(Tensor::scalar(1000.0)), NumericError);
  CHECK_THROWS_AS(Tensor(Shape{2, 0}), DimensionError);
}
