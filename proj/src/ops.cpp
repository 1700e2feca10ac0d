// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace hwm {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const RowMat>;
using MMap = Eigen::Map<RowMat>;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

void require_rank(const Tensor& a, std::size_t r, const char* op) {
  if (a.rank() != r)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(r) + ", got " +
                         shape_str(a.shape()));
}

std::vector<double> copy_data(const Tensor& t) {
  auto d = t.data();
  return {d.begin(), d.end()};
}

template <class F>
Tensor unary(const Tensor& x, const char* op, F value, std::function<double(double)> deriv) {
  auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = value(in[i]);
  check_finite(out, op);
  return make_result(x.shape(), std::move(out), op, {x}, [x, deriv](std::span<const double> g) {
    Tensor xi = x;
    auto gx = xi.grad_buffer();
    auto xd = x.data();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xd[i]);
  });
}

}  // namespace

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  if (x > 20.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: inner extents differ " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  std::vector<double> out(m * n);
  MMap(out.data(), m, n).noalias() = CMap(a.data().data(), m, k) * CMap(b.data().data(), k, n);
  return make_result({m, n}, std::move(out), "matmul", {a, b},
                     [a, b, m, k, n](std::span<const double> g) {
                       CMap gy(g.data(), m, n);
                       if (a.requires_grad()) {
                         Tensor t = a;
                         MMap(t.grad_buffer().data(), m, k).noalias() +=
                             gy * CMap(b.data().data(), k, n).transpose();
                       }
                       if (b.requires_grad()) {
                         Tensor t = b;
                         MMap(t.grad_buffer().data(), k, n).noalias() +=
                             CMap(a.data().data(), m, k).transpose() * gy;
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const auto m = a.dim(0), n = a.dim(1);
  std::vector<double> out(m * n);
  MMap(out.data(), n, m) = CMap(a.data().data(), m, n).transpose();
  return make_result({n, m}, std::move(out), "transpose", {a}, [a, m, n](std::span<const double> g) {
    Tensor t = a;
    MMap(t.grad_buffer().data(), m, n) += CMap(g.data(), n, m).transpose();
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  require_rank(x, 2, "linear");
  require_rank(w, 2, "linear");
  const auto m = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  if (w.dim(1) != in)
    throw DimensionError("linear: weight " + shape_str(w.shape()) + " does not accept input " +
                         shape_str(x.shape()));
  if (b.defined() && (b.rank() != 1 || b.dim(0) != out_dim))
    throw DimensionError("linear: bias shape " + shape_str(b.shape()));
  std::vector<double> out(m * out_dim);
  MMap y(out.data(), m, out_dim);
  y.noalias() = CMap(x.data().data(), m, in) * CMap(w.data().data(), out_dim, in).transpose();
  if (b.defined()) {
    Eigen::Map<const Eigen::RowVectorXd> bv(b.data().data(), out_dim);
    y.rowwise() += bv;
  }
  std::vector<Tensor> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return make_result({m, out_dim}, std::move(out), "linear", std::move(inputs),
                     [x, w, b, m, in, out_dim](std::span<const double> g) {
                       CMap gy(g.data(), m, out_dim);
                       if (x.requires_grad()) {
                         Tensor t = x;
                         MMap(t.grad_buffer().data(), m, in).noalias() +=
                             gy * CMap(w.data().data(), out_dim, in);
                       }
                       if (w.requires_grad()) {
                         Tensor t = w;
                         MMap(t.grad_buffer().data(), out_dim, in).noalias() +=
                             gy.transpose() * CMap(x.data().data(), m, in);
                       }
                       if (b.defined() && b.requires_grad()) {
                         Tensor t = b;
                         Eigen::Map<Eigen::RowVectorXd>(t.grad_buffer().data(), out_dim) +=
                             gy.colwise().sum();
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
  return make_result(a.shape(), std::move(out), "add", {a, b}, [a, b](std::span<const double> g) {
    for (Tensor t : {a, b}) {
      if (!t.requires_grad()) continue;
      auto gt = t.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
  return make_result(a.shape(), std::move(out), "sub", {a, b}, [a, b](std::span<const double> g) {
    if (a.requires_grad()) {
      Tensor t = a;
      auto gt = t.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
    }
    if (b.requires_grad()) {
      Tensor t = b;
      auto gt = t.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] -= g[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  auto x = a.data(), y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
  check_finite(out, "mul");
  return make_result(a.shape(), std::move(out), "mul", {a, b}, [a, b](std::span<const double> g) {
    auto x = a.data(), y = b.data();
    if (a.requires_grad()) {
      Tensor t = a;
      auto gt = t.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i] * y[i];
    }
    if (b.requires_grad()) {
      Tensor t = b;
      auto gt = t.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i] * x[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * s;
  check_finite(out, "scale");
  return make_result(a.shape(), std::move(out), "scale", {a}, [a, s](std::span<const double> g) {
    Tensor t = a;
    auto gt = t.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i] * s;
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  auto x = a.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + s;
  return make_result(a.shape(), std::move(out), "add_scalar", {a}, [a](std::span<const double> g) {
    Tensor t = a;
    auto gt = t.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
  });
}

Tensor add_channel(const Tensor& x, const Tensor& b) {
  const auto n = x.shape().back();
  if (b.rank() != 1 || b.dim(0) != n)
    throw DimensionError("add_channel: " + shape_str(b.shape()) + " vs " + shape_str(x.shape()));
  auto xd = x.data(), bd = b.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] + bd[i % n];
  return make_result(x.shape(), std::move(out), "add_channel", {x, b},
                     [x, b, n](std::span<const double> g) {
                       if (x.requires_grad()) {
                         Tensor t = x;
                         auto gt = t.grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
                       }
                       if (b.requires_grad()) {
                         Tensor t = b;
                         auto gt = t.grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) gt[i % n] += g[i];
                       }
                     });
}

Tensor mul_channel(const Tensor& x, const Tensor& v) {
  const auto n = x.shape().back();
  if (v.rank() != 1 || v.dim(0) != n)
    throw DimensionError("mul_channel: " + shape_str(v.shape()) + " vs " + shape_str(x.shape()));
  auto xd = x.data(), vd = v.data();
  std::vector<double> out(xd.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * vd[i % n];
  return make_result(x.shape(), std::move(out), "mul_channel", {x, v},
                     [x, v, n](std::span<const double> g) {
                       auto xd = x.data(), vd = v.data();
                       if (x.requires_grad()) {
                         Tensor t = x;
                         auto gt = t.grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i] * vd[i % n];
                       }
                       if (v.requires_grad()) {
                         Tensor t = v;
                         auto gt = t.grad_buffer();
                         for (std::size_t i = 0; i < g.size(); ++i) gt[i % n] += g[i] * xd[i];
                       }
                     });
}

Tensor exp(const Tensor& x) {
  return unary(
      x, "exp", [](double v) { return std::exp(v); }, [](double v) { return std::exp(v); });
}

Tensor sigmoid(const Tensor& x) {
  return unary(x, "sigmoid", sigmoid_scalar, [](double v) {
    double s = sigmoid_scalar(v);
    return s * (1.0 - s);
  });
}

Tensor silu(const Tensor& x) {
  return unary(
      x, "silu", [](double v) { return v * sigmoid_scalar(v); },
      [](double v) {
        double s = sigmoid_scalar(v);
        return s * (1.0 + v * (1.0 - s));
      });
}

Tensor softplus(const Tensor& x) { return unary(x, "softplus", softplus_scalar, sigmoid_scalar); }

Tensor sum(const Tensor& x) {
  auto d = x.data();
  double s = std::accumulate(d.begin(), d.end(), 0.0);
  return make_result({1}, {s}, "sum", {x}, [x](std::span<const double> g) {
    Tensor t = x;
    for (auto& v : t.grad_buffer()) v += g[0];
  });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  const auto& s = x.shape();
  if (axis >= s.size()) throw ParameterError("sum: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t n = s[axis];
  Shape os;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis) os.push_back(s[i]);
  if (os.empty()) os.push_back(1);
  auto d = x.data();
  std::vector<double> out(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < inner; ++i) out[o * inner + i] += d[(o * n + k) * inner + i];
  return make_result(std::move(os), std::move(out), "sum_axis", {x},
                     [x, outer, inner, n](std::span<const double> g) {
                       Tensor t = x;
                       auto gt = t.grad_buffer();
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t k = 0; k < n; ++k)
                           for (std::size_t i = 0; i < inner; ++i)
                             gt[(o * n + k) * inner + i] += g[o * inner + i];
                     });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor mean(const Tensor& x, std::size_t axis) {
  if (axis >= x.rank()) throw ParameterError("mean: axis out of range");
  return scale(sum(x, axis), 1.0 / static_cast<double>(x.dim(axis)));
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 3, "global_avg_pool");
  const auto c = x.dim(0), hw = x.dim(1) * x.dim(2);
  return scale(sum(reshape(x, {c, hw}), 1), 1.0 / static_cast<double>(hw));
}

Tensor layer_norm(const Tensor& x, std::size_t normalized_extent, const Tensor& gamma,
                  const Tensor& beta, double eps) {
  if (!(eps > 0)) throw ParameterError("layer_norm: eps must be positive");
  const auto n = normalized_extent;
  if (x.shape().back() != n)
    throw DimensionError("layer_norm: last axis of " + shape_str(x.shape()) + " is not " +
                         std::to_string(n));
  if (gamma.shape() != Shape{n} || beta.shape() != Shape{n})
    throw DimensionError("layer_norm: affine parameters must have shape [" + std::to_string(n) +
                         "]");
  const auto rows = x.numel() / n;
  auto xd = x.data(), gd = gamma.data(), bd = beta.data();
  std::vector<double> out(x.numel()), xhat(x.numel()), inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xd.data() + r * n;
    double mu = 0;
    for (std::size_t i = 0; i < n; ++i) mu += row[i];
    mu /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) var += (row[i] - mu) * (row[i] - mu);
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t i = 0; i < n; ++i) {
      double h = (row[i] - mu) * is;
      xhat[r * n + i] = h;
      out[r * n + i] = h * gd[i] + bd[i];
    }
  }
  return make_result(
      x.shape(), std::move(out), "layer_norm", {x, gamma, beta},
      [x, gamma, beta, n, rows, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](std::span<const double> g) {
        auto gd = gamma.data();
        if (gamma.requires_grad() || beta.requires_grad()) {
          Tensor gt = gamma, bt = beta;
          auto gg = gamma.requires_grad() ? gt.grad_buffer() : std::span<double>{};
          auto gb = beta.requires_grad() ? bt.grad_buffer() : std::span<double>{};
          for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t i = 0; i < n; ++i) {
              if (!gg.empty()) gg[i] += g[r * n + i] * xhat[r * n + i];
              if (!gb.empty()) gb[i] += g[r * n + i];
            }
        }
        if (!x.requires_grad()) return;
        Tensor xt = x;
        auto gx = xt.grad_buffer();
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t r = 0; r < rows; ++r) {
          double mg = 0, mgx = 0;
          for (std::size_t i = 0; i < n; ++i) {
            double gi = g[r * n + i] * gd[i];
            mg += gi;
            mgx += gi * xhat[r * n + i];
          }
          mg *= inv_n;
          mgx *= inv_n;
          for (std::size_t i = 0; i < n; ++i) {
            double gi = g[r * n + i] * gd[i];
            gx[r * n + i] += inv_std[r] * (gi - mg - xhat[r * n + i] * mgx);
          }
        }
      });
}

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad) {
  if (stride == 0) throw ParameterError("conv2d: stride must be positive");
  if (in + 2 * pad < kernel)
    throw DimensionError("conv2d: kernel " + std::to_string(kernel) +
                         " larger than padded input " + std::to_string(in + 2 * pad));
  return (in + 2 * pad - kernel) / stride + 1;
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& bias, const Conv2dOptions& opt) {
  require_rank(x, 3, "conv2d");
  require_rank(w, 4, "conv2d");
  const auto cin = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const auto cout = w.dim(0), cpg = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const auto groups = opt.groups;
  if (groups == 0 || cin % groups != 0 || cout % groups != 0)
    throw DimensionError("conv2d: channels " + std::to_string(cin) + "->" + std::to_string(cout) +
                         " not divisible by groups " + std::to_string(groups));
  if (cpg != cin / groups)
    throw DimensionError("conv2d: weight " + shape_str(w.shape()) + " expects " +
                         std::to_string(cpg * groups) + " input channels, got " +
                         std::to_string(cin));
  if (bias.defined() && bias.shape() != Shape{cout})
    throw DimensionError("conv2d: bias shape " + shape_str(bias.shape()));
  const auto ho = conv_out_extent(h, kh, opt.stride_h, opt.pad_h);
  const auto wo = conv_out_extent(wd, kw, opt.stride_w, opt.pad_w);
  const auto opg = cout / groups;
  const auto sh = opt.stride_h, sw = opt.stride_w;
  const long ph = static_cast<long>(opt.pad_h), pw = static_cast<long>(opt.pad_w);

  // Visits every (output, input, weight) triple of the correlation.
  auto for_each_tap = [=](auto&& fn) {
    for (std::size_t co = 0; co < cout; ++co) {
      const std::size_t gidx = co / opg;
      for (std::size_t cj = 0; cj < cpg; ++cj) {
        const std::size_t ci = gidx * cpg + cj;
        for (std::size_t a = 0; a < kh; ++a)
          for (std::size_t b = 0; b < kw; ++b) {
            const std::size_t widx = ((co * cpg + cj) * kh + a) * kw + b;
            for (std::size_t oy = 0; oy < ho; ++oy) {
              const long iy = static_cast<long>(oy * sh + a) - ph;
              if (iy < 0 || iy >= static_cast<long>(h)) continue;
              const std::size_t obase = (co * ho + oy) * wo;
              const std::size_t ibase = (ci * h + static_cast<std::size_t>(iy)) * wd;
              for (std::size_t ox = 0; ox < wo; ++ox) {
                const long ix = static_cast<long>(ox * sw + b) - pw;
                if (ix < 0 || ix >= static_cast<long>(wd)) continue;
                fn(obase + ox, ibase + static_cast<std::size_t>(ix), widx);
              }
            }
          }
      }
    }
  };

  std::vector<double> out(cout * ho * wo, 0.0);
  {
    auto xd = x.data(), wdat = w.data();
    for_each_tap([&](std::size_t o, std::size_t i, std::size_t k) { out[o] += xd[i] * wdat[k]; });
    if (bias.defined()) {
      auto bd = bias.data();
      for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t p = 0; p < ho * wo; ++p) out[co * ho * wo + p] += bd[co];
    }
  }
  std::vector<Tensor> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({cout, ho, wo}, std::move(out), "conv2d", std::move(inputs),
                     [x, w, bias, for_each_tap, cout, ho, wo](std::span<const double> g) {
                       auto xd = x.data(), wdat = w.data();
                       if (x.requires_grad()) {
                         Tensor t = x;
                         auto gx = t.grad_buffer();
                         for_each_tap([&](std::size_t o, std::size_t i, std::size_t k) {
                           gx[i] += g[o] * wdat[k];
                         });
                       }
                       if (w.requires_grad()) {
                         Tensor t = w;
                         auto gw = t.grad_buffer();
                         for_each_tap([&](std::size_t o, std::size_t i, std::size_t k) {
                           gw[k] += g[o] * xd[i];
                         });
                       }
                       if (bias.defined() && bias.requires_grad()) {
                         Tensor t = bias;
                         auto gb = t.grad_buffer();
                         for (std::size_t co = 0; co < cout; ++co)
                           for (std::size_t p = 0; p < ho * wo; ++p) gb[co] += g[co * ho * wo + p];
                       }
                     });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel())
    throw DimensionError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  return make_result(std::move(shape), copy_data(x), "reshape", {x},
                     [x](std::span<const double> g) {
                       Tensor t = x;
                       auto gt = t.grad_buffer();
                       for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
                     });
}

Tensor permute(const Tensor& x, const std::vector<std::size_t>& perm) {
  const auto& s = x.shape();
  const auto r = s.size();
  if (perm.size() != r) throw DimensionError("permute: wrong number of axes");
  std::vector<bool> used(r, false);
  for (auto p : perm) {
    if (p >= r || used[p]) throw DimensionError("permute: not a permutation");
    used[p] = true;
  }
  Shape os(r);
  for (std::size_t i = 0; i < r; ++i) os[i] = s[perm[i]];
  std::vector<std::size_t> in_strides(r, 1);
  for (std::size_t i = r - 1; i-- > 0;) in_strides[i] = in_strides[i + 1] * s[i + 1];
  // src[j] is the input flat index for output flat index j.
  const auto n = x.numel();
  std::vector<std::size_t> src(n);
  std::vector<std::size_t> idx(r, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t off = 0;
    for (std::size_t a = 0; a < r; ++a) off += idx[a] * in_strides[perm[a]];
    src[j] = off;
    for (std::size_t a = r; a-- > 0;) {
      if (++idx[a] < os[a]) break;
      idx[a] = 0;
    }
  }
  auto xd = x.data();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = xd[src[j]];
  return make_result(std::move(os), std::move(out), "permute", {x},
                     [x, src = std::move(src)](std::span<const double> g) {
                       Tensor t = x;
                       auto gt = t.grad_buffer();
                       for (std::size_t j = 0; j < g.size(); ++j) gt[src[j]] += g[j];
                     });
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& index) {
  const auto rows = x.dim(0);
  const auto width = x.numel() / rows;
  for (auto i : index)
    if (i >= rows) throw DimensionError("gather_rows: index out of range");
  auto xd = x.data();
  std::vector<double> out(index.size() * width);
  for (std::size_t r = 0; r < index.size(); ++r)
    std::copy_n(xd.begin() + static_cast<long>(index[r] * width), width,
                out.begin() + static_cast<long>(r * width));
  Shape os = x.shape();
  os[0] = index.size();
  return make_result(std::move(os), std::move(out), "gather_rows", {x},
                     [x, index, width](std::span<const double> g) {
                       Tensor t = x;
                       auto gt = t.grad_buffer();
                       for (std::size_t r = 0; r < index.size(); ++r)
                         for (std::size_t c = 0; c < width; ++c)
                           gt[index[r] * width + c] += g[r * width + c];
                     });
}

Tensor pad_end(const Tensor& x, std::size_t height, std::size_t width) {
  require_rank(x, 3, "pad_end");
  const auto c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (height < h || width < w) throw DimensionError("pad_end: target smaller than input");
  if (height == h && width == w) return x;
  auto xd = x.data();
  std::vector<double> out(c * height * width, 0.0);
  for (std::size_t k = 0; k < c; ++k)
    for (std::size_t i = 0; i < h; ++i)
      std::copy_n(xd.begin() + static_cast<long>((k * h + i) * w), w,
                  out.begin() + static_cast<long>((k * height + i) * width));
  return make_result({c, height, width}, std::move(out), "pad_end", {x},
                     [x, c, h, w, height, width](std::span<const double> g) {
                       Tensor t = x;
                       auto gt = t.grad_buffer();
                       for (std::size_t k = 0; k < c; ++k)
                         for (std::size_t i = 0; i < h; ++i)
                           for (std::size_t j = 0; j < w; ++j)
                             gt[(k * h + i) * w + j] += g[(k * height + i) * width + j];
                     });
}

Tensor stack(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("stack: no inputs");
  const Shape& s = parts.front().shape();
  for (const auto& p : parts)
    if (p.shape() != s) throw DimensionError("stack: shape mismatch");
  const auto each = parts.front().numel();
  std::vector<double> out;
  out.reserve(each * parts.size());
  for (const auto& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  Shape os{parts.size()};
  os.insert(os.end(), s.begin(), s.end());
  return make_result(std::move(os), std::move(out), "stack", parts,
                     [parts, each](std::span<const double> g) {
                       for (std::size_t k = 0; k < parts.size(); ++k) {
                         if (!parts[k].requires_grad()) continue;
                         Tensor t = parts[k];
                         auto gt = t.grad_buffer();
                         for (std::size_t i = 0; i < each; ++i) gt[i] += g[k * each + i];
                       }
                     });
}

}  // namespace hwm
