// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-difference error of every differentiable operation on random inputs.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hwmamba/gradcheck.hpp"
#include "hwmamba/net.hpp"
#include "hwmamba/ops.hpp"
#include "hwmamba/random.hpp"
#include "hwmamba/scan2d.hpp"
#include "oracles/ssm_oracles.hpp"

namespace hwm::oracle {

using GradErrors = std::vector<std::pair<std::string, double>>;

// One entry per (operation, differentiated argument), each against the
// central-difference oracle at step 1e-5.
inline GradErrors primitive_gradient_errors(std::uint64_t seed) {
  Rng rng(100 + seed);
  auto a = random_tensor({3, 4}, rng), b = random_tensor({4, 2}, rng);
  auto w = random_tensor({5, 4}, rng), bias = random_tensor({5}, rng);
  auto m = random_tensor({3, 4}, rng), v4 = random_tensor({4}, rng);
  auto img = random_tensor({4, 5, 6}, rng);
  auto kern = random_tensor({4, 2, 3, 3}, rng), kb = random_tensor({4}, rng);
  auto g = random_tensor({4}, rng, 0.5, 1.5), be = random_tensor({4}, rng);
  auto wsum = random_tensor({3, 4}, rng);
  // Weighted sums keep the scalar root sensitive to every output coordinate.
  auto wdot = [](const Tensor& t, const Tensor& wt) { return sum(mul(t, wt)); };
  using F = std::function<Tensor(const Tensor&)>;
  GradErrors out;
  auto run = [&](const char* name, const F& f, const Tensor& x) {
    out.emplace_back(name, finite_diff_check(f, x));
  };

  run("matmul/a", [&](const Tensor& t) { return sum(matmul(t, b)); }, a);
  run("matmul/b", [&](const Tensor& t) { return sum(mul(matmul(a, t), matmul(a, t))); }, b);
  run("transpose", [&](const Tensor& t) { return wdot(transpose(t), transpose(wsum)); }, m);
  run("linear/x", [&](const Tensor& t) { return sum(sigmoid(linear(t, w, bias))); }, m);
  run("linear/w", [&](const Tensor& t) { return sum(sigmoid(linear(m, t, bias))); }, w);
  run("linear/b", [&](const Tensor& t) { return sum(sigmoid(linear(m, w, t))); }, bias);
  run("add", [&](const Tensor& t) { return wdot(add(t, m), wsum); }, a);
  run("sub", [&](const Tensor& t) { return wdot(sub(t, m), wsum); }, a);
  run("mul", [&](const Tensor& t) { return wdot(mul(t, t), wsum); }, a);
  run("scale", [&](const Tensor& t) { return wdot(scale(t, -1.7), wsum); }, a);
  run("add_scalar", [&](const Tensor& t) { return wdot(add_scalar(t, 2.0), t); }, a);
  run("add_channel", [&](const Tensor& t) { return wdot(add_channel(m, t), wsum); }, v4);
  run("mul_channel/v", [&](const Tensor& t) { return wdot(mul_channel(m, t), wsum); }, v4);
  run("mul_channel/x", [&](const Tensor& t) { return wdot(mul_channel(t, v4), wsum); }, m);
  run("exp", [&](const Tensor& t) { return wdot(exp(t), wsum); }, a);
  run("sigmoid", [&](const Tensor& t) { return wdot(sigmoid(scale(t, 4)), wsum); }, a);
  run("silu", [&](const Tensor& t) { return wdot(silu(scale(t, 4)), wsum); }, a);
  run("softplus", [&](const Tensor& t) { return wdot(softplus(scale(t, 30)), wsum); }, a);
  run("sum", [&](const Tensor& t) { return mul(sum(t), sum(t)); }, a);
  run("sum/axis", [&](const Tensor& t) { return sum(mul(sum(t, 0), sum(t, 0))); }, a);
  run("mean", [&](const Tensor& t) { return mul(mean(t), mean(t)); }, a);
  run("mean/axis", [&](const Tensor& t) { return sum(mul(mean(t, 1), mean(t, 1))); }, a);
  run("global_avg_pool",
      [&](const Tensor& t) {
        auto p = global_avg_pool(t);
        return sum(mul(p, p));
      },
      img);
  auto ln = [&](const Tensor& x, const Tensor& gg, const Tensor& bb) {
    return wdot(layer_norm(x, 4, gg, bb, 1e-5), wsum);
  };
  run("layer_norm/x", [&](const Tensor& t) { return ln(t, g, be); }, m);
  run("layer_norm/gamma", [&](const Tensor& t) { return ln(m, t, be); }, g);
  run("layer_norm/beta", [&](const Tensor& t) { return ln(m, g, t); }, be);
  auto conv = [&](const Tensor& x, const Tensor& k, const Tensor& kbias) {
    auto y = conv2d(x, k, kbias, Conv2dOptions{1, 2, 1, 1, 2});
    return sum(mul(y, y));
  };
  run("conv2d/x", [&](const Tensor& t) { return conv(t, kern, kb); }, img);
  run("conv2d/w", [&](const Tensor& t) { return conv(img, t, kb); }, kern);
  run("conv2d/b", [&](const Tensor& t) { return conv(img, kern, t); }, kb);
  run("permute+reshape",
      [&](const Tensor& t) {
        return wdot(reshape(permute(t, {2, 0, 1}), {6, 20}), reshape(img, {6, 20}));
      },
      img);
  run("gather_rows",
      [&](const Tensor& t) {
        auto sel = gather_rows(t, {2, 0, 0, 1});
        return sum(mul(sel, sel));
      },
      m);
  run("pad_end",
      [&](const Tensor& t) {
        auto p = pad_end(t, 6, 8);
        return sum(mul(p, p));
      },
      img);
  run("stack",
      [&](const Tensor& t) {
        auto s = stack({t, scale(t, 2.0)});
        return sum(mul(s, s));
      },
      v4);
  auto targets = Tensor::vector({1, 0, 0, 1, 1});
  run("bce_loss", [&](const Tensor& t) { return bce_loss(t, targets); },
      random_tensor({5}, rng, -4, 4));

  // Selective scan machinery: every parameter tensor plus the input.
  {
    const std::size_t L = 3 + seed % 6, N = 1 + seed % 4, D = 1 + seed % 3;
    auto p = random_ssm_params(D, N, 1, rng);
    p.d_skip = random_tensor({D}, rng);
    auto x = random_tensor({L, D}, rng), wy = random_tensor({L, D}, rng);
    auto h0 = random_tensor({D, N}, rng);
    std::vector<Tensor> leaves{x};
    for (auto& [name, t] : p.named()) leaves.push_back(t);
    for (auto& t : leaves) t.set_requires_grad();
    out.emplace_back("s6_scan", finite_diff_check_params(
                                    [&] { return sum(mul(s6_scan(x, p, h0), wy)); }, leaves));
    auto proj_w = random_tensor({L, N}, rng);
    out.emplace_back("selective_params",
                     finite_diff_check_params(
                         [&] {
                           auto sp = selective_params(x, p);
                           return add(add(sum(mul(sp.b, proj_w)), sum(mul(sp.c, sp.c))),
                                      sum(mul(sp.delta, wy)));
                         },
                         leaves));
  }
  {
    const std::size_t C = 1 + seed % 3, H = 1 + (seed + 1) % 3, W = 2 + seed % 3;
    CrossScanParams cross;
    for (auto& p : cross) p = random_ssm_params(C, 2, 1, rng);
    auto x = random_tensor({C, H, W}, rng), wy = random_tensor({C, H, W}, rng);
    std::vector<Tensor> leaves{x};
    for (auto& p : cross)
      for (auto& [name, t] : p.named()) leaves.push_back(t);
    for (auto& t : leaves) t.set_requires_grad();
    out.emplace_back("ss2d", finite_diff_check_params(
                                 [&] { return sum(mul(ss2d(FeatureMap(x), cross).tensor(), wy)); },
                                 leaves));
  }
  return out;
}

}  // namespace hwm::oracle
