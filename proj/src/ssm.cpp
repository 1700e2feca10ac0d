// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hwmamba/ops.hpp"

namespace hwm {

double expm1_ratio(double x) {
  if (std::abs(x) < 1e-4) return 1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0)));
  return std::expm1(x) / x;
}

double expm1_ratio_derivative(double x) {
  if (std::abs(x) < 1e-2)
    return 0.5 + x * (1.0 / 3.0 + x * (1.0 / 8.0 + x * (1.0 / 30.0 + x * (1.0 / 144.0))));
  return (std::exp(x) * (x - 1.0) + 1.0) / (x * x);
}

DiscreteStep discretize(std::span<const double> a, std::span<const double> b, double delta) {
  if (!(delta > 0)) throw ParameterError("discretize: delta must be positive");
  if (a.size() != b.size()) throw DimensionError("discretize: A and B lengths differ");
  DiscreteStep out;
  out.a_bar.resize(a.size());
  out.b_bar.resize(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    if (!(a[n] < 0)) throw ParameterError("discretize: A must be strictly negative");
    const double z = delta * a[n];
    out.a_bar[n] = std::exp(z);
    out.b_bar[n] = expm1_ratio(z) * delta * b[n];
  }
  check_finite(out.a_bar, "discretize");
  check_finite(out.b_bar, "discretize");
  return out;
}

SsmParams SsmParams::init(std::size_t channels, std::size_t state_dim, std::size_t rank, Rng& rng,
                          bool d_skip) {
  if (rank == 0 || rank > channels)
    throw ParameterError("SsmParams: rank must be in [1, channels]");
  SsmParams p;
  p.a_log = Tensor({channels, state_dim});
  auto al = p.a_log.data();
  for (std::size_t d = 0; d < channels; ++d)
    for (std::size_t n = 0; n < state_dim; ++n)
      al[d * state_dim + n] = std::log(static_cast<double>(n + 1));
  p.w_b = Tensor({state_dim, channels});
  p.w_c = Tensor({state_dim, channels});
  p.dt_down = Tensor({rank, channels});
  p.dt_up = Tensor({channels, rank});
  fill_trunc_normal(p.w_b, 0.02, rng);
  fill_trunc_normal(p.w_c, 0.02, rng);
  fill_trunc_normal(p.dt_down, 0.02, rng);
  fill_trunc_normal(p.dt_up, 0.02, rng);
  p.dt_bias = Tensor({channels});
  std::uniform_real_distribution<double> u(std::log(1e-3), std::log(1e-1));
  for (auto& v : p.dt_bias.data()) {
    const double dt = std::exp(u(rng));
    v = dt + std::log(-std::expm1(-dt));  // inverse softplus
  }
  if (d_skip) p.d_skip = Tensor::ones({channels});
  return p;
}

void SsmParams::validate() const {
  const auto d = channels(), n = state_dim(), r = rank();
  auto expect = [](const Tensor& t, const Shape& s, const char* name) {
    if (t.shape() != s)
      throw DimensionError(std::string("SsmParams: ") + name + " has shape " +
                           shape_str(t.shape()) + ", expected " + shape_str(s));
  };
  expect(a_log, {d, n}, "a_log");
  expect(w_b, {n, d}, "w_b");
  expect(w_c, {n, d}, "w_c");
  expect(dt_down, {r, d}, "dt_down");
  expect(dt_up, {d, r}, "dt_up");
  if (d_skip.defined()) expect(d_skip, {d}, "d_skip");
  if (r > d) throw DimensionError("SsmParams: rank exceeds channels");
}

std::vector<std::pair<std::string, Tensor>> SsmParams::named() const {
  std::vector<std::pair<std::string, Tensor>> out{{"a_log", a_log},     {"w_b", w_b},
                                                  {"w_c", w_c},         {"dt_down", dt_down},
                                                  {"dt_up", dt_up},     {"dt_bias", dt_bias}};
  if (d_skip.defined()) out.emplace_back("d_skip", d_skip);
  return out;
}

Tensor materialize_a(const SsmParams& p) { return scale(exp(p.a_log), -1.0); }

SelectiveProjection selective_params(const Tensor& x, const SsmParams& p) {
  const auto d = p.channels();
  Tensor seq = x;
  if (x.rank() == 1) seq = reshape(x, {1, x.dim(0)});
  if (seq.rank() != 2 || seq.dim(1) != d)
    throw DimensionError("selective_params: input " + shape_str(x.shape()) + " does not have " +
                         std::to_string(d) + " channels");
  SelectiveProjection out;
  out.b = linear(seq, p.w_b, {});
  out.c = linear(seq, p.w_c, {});
  out.delta = softplus(add_channel(linear(linear(seq, p.dt_down, {}), p.dt_up, {}), p.dt_bias));
  if (x.rank() == 1) {
    out.b = reshape(out.b, {p.state_dim()});
    out.c = reshape(out.c, {p.state_dim()});
    out.delta = reshape(out.delta, {d});
  }
  return out;
}

namespace {

// e^z - 1. Beyond |z| = 0.25 the subtraction loses under three bits and exp
// is the cheaper call.
inline double fast_expm1(double z) {
  return (z < -0.25 || z > 0.25) ? std::exp(z) - 1.0 : std::expm1(z);
}

struct ScanDims {
  std::size_t len, channels, state;
};

// e^z - 1 per element, row-major [step x D x N], with z = delta * A. The
// input gain expm1_ratio(z) * delta equals (e^z - 1) / A, and A is bounded
// away from zero, so no division by z is needed anywhere in the scan.
struct StepFactors {
  double* em1;
};

// Advances `h` over steps [begin, end), optionally writing y and the step
// factors (offset so that index 0 is step `begin`).
void scan_steps(const ScanDims& dim, const double* x, const double* dt, const double* a,
                const double* inv_a, const double* b, const double* c, double* h, double* y,
                std::size_t begin, std::size_t end, StepFactors out) {
  const auto D = dim.channels, N = dim.state;
  for (std::size_t k = begin; k < end; ++k) {
    const double* bk = b + k * N;
    const double* ck = c + k * N;
    for (std::size_t d = 0; d < D; ++d) {
      const double step = dt[k * D + d];
      const double xv = x[k * D + d];
      const double* ad = a + d * N;
      const double* inv = inv_a + d * N;
      double* hd = h + d * N;
      double acc = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        const double em1 = fast_expm1(step * ad[n]);
        hd[n] = (1.0 + em1) * hd[n] + em1 * inv[n] * bk[n] * xv;
        acc += ck[n] * hd[n];
        if (out.em1) out.em1[(k - begin) * D * N + d * N + n] = em1;
      }
      if (y) y[k * D + d] = acc;
    }
  }
}

// Recomputes the states after each step in [begin, end) from stored factors.
// states[0] holds the state before `begin` on entry.
void replay_states(const ScanDims& dim, const double* x, const double* b, const double* em1,
                   const double* inv_a, std::size_t begin, std::size_t end, double* states) {
  const auto D = dim.channels, N = dim.state, DN = D * N;
  for (std::size_t k = begin; k < end; ++k) {
    const double* prev = states + (k - begin) * DN;
    double* next = states + (k - begin + 1) * DN;
    const double* e = em1 + (k - begin) * DN;
    const double* bk = b + k * N;
    for (std::size_t d = 0; d < D; ++d) {
      const double xv = x[k * D + d];
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t i = d * N + n;
        next[i] = (1.0 + e[i]) * prev[i] + e[i] * inv_a[i] * bk[n] * xv;
      }
    }
  }
}

}  // namespace

Tensor selective_scan(const Tensor& x, const Tensor& delta, const Tensor& a, const Tensor& b,
                      const Tensor& c, const Tensor& h0, Tensor* final_state,
                      std::size_t checkpoint_every, std::size_t factor_cache_limit) {
  if (x.rank() != 2) throw DimensionError("selective_scan: x must be [L x D]");
  const ScanDims dim{x.dim(0), x.dim(1), a.rank() == 2 ? a.dim(1) : 0};
  const auto L = dim.len, D = dim.channels, N = dim.state, DN = D * N;
  if (delta.shape() != Shape{L, D}) throw DimensionError("selective_scan: delta shape");
  if (a.shape() != Shape{D, N}) throw DimensionError("selective_scan: A shape");
  if (b.shape() != Shape{L, N} || c.shape() != Shape{L, N})
    throw DimensionError("selective_scan: B/C shape");
  if (h0.defined() && h0.shape() != Shape{D, N}) throw DimensionError("selective_scan: h0 shape");
  checkpoint_every = std::clamp<std::size_t>(checkpoint_every, 1, L);

  const bool record = grad_enabled() && (x.requires_grad() || delta.requires_grad() ||
                                         a.requires_grad() || b.requires_grad() ||
                                         c.requires_grad());
  const bool cache = record && L * DN <= factor_cache_limit;
  std::vector<double> inv_a(DN);
  {
    auto av = a.data();
    for (std::size_t i = 0; i < DN; ++i) {
      if (!(av[i] < 0)) throw ParameterError("selective_scan: A must be strictly negative");
      inv_a[i] = 1.0 / av[i];
    }
  }
  std::vector<double> h(DN, 0.0);
  if (h0.defined()) std::copy(h0.data().begin(), h0.data().end(), h.begin());
  std::vector<double> y(L * D);
  std::vector<double> checkpoints;  // state before each chunk
  std::vector<double> em1_all;
  if (cache) em1_all.resize(L * DN);
  const std::size_t chunks = (L + checkpoint_every - 1) / checkpoint_every;
  if (record) checkpoints.reserve(chunks * DN);
  for (std::size_t ch = 0; ch < chunks; ++ch) {
    if (record) checkpoints.insert(checkpoints.end(), h.begin(), h.end());
    const auto begin = ch * checkpoint_every, end = std::min(L, begin + checkpoint_every);
    StepFactors out{cache ? em1_all.data() + begin * DN : nullptr};
    scan_steps(dim, x.data().data(), delta.data().data(), a.data().data(), inv_a.data(),
               b.data().data(), c.data().data(), h.data(), y.data(), begin, end, out);
  }
  check_finite(y, "selective_scan");
  check_finite(h, "selective_scan state");
  if (final_state) *final_state = Tensor({D, N}, h);
  if (!record) return Tensor({L, D}, std::move(y));

  return make_result(
      {L, D}, std::move(y), "selective_scan", {x, delta, a, b, c},
      [x, delta, a, b, c, dim, checkpoint_every, chunks, checkpoints = std::move(checkpoints),
       em1_all = std::move(em1_all), inv_a = std::move(inv_a)](std::span<const double> gy) {
        const auto D = dim.channels, N = dim.state, L = dim.len, DN = D * N;
        const bool cached = !em1_all.empty();
        auto xd = x.data(), dtd = delta.data(), ad = a.data(), bd = b.data(), cd = c.data();
        std::vector<double> gx(L * D, 0.0), gdt(L * D, 0.0), ga(DN, 0.0), gb(L * N, 0.0),
            gc(L * N, 0.0), gh(DN, 0.0);
        // states[0] = state before the chunk; states[j] = state after its j-th step.
        std::vector<double> states((checkpoint_every + 1) * DN);
        std::vector<double> em1_chunk;
        if (!cached) em1_chunk.resize(checkpoint_every * DN);
        for (std::size_t ch = chunks; ch-- > 0;) {
          const auto begin = ch * checkpoint_every, end = std::min(L, begin + checkpoint_every);
          std::copy_n(checkpoints.begin() + static_cast<long>(ch * DN), DN, states.begin());
          const double* em1p = em1_all.data() + begin * DN;
          if (!cached) {
            std::vector<double> h(states.begin(), states.begin() + static_cast<long>(DN));
            scan_steps(dim, xd.data(), dtd.data(), ad.data(), inv_a.data(), bd.data(), cd.data(),
                       h.data(), nullptr, begin, end, StepFactors{em1_chunk.data()});
            em1p = em1_chunk.data();
          }
          replay_states(dim, xd.data(), bd.data(), em1p, inv_a.data(), begin, end,
                        states.data());
          for (std::size_t k = end; k-- > begin;) {
            const double* hk = states.data() + (k - begin + 1) * DN;
            const double* hprev = states.data() + (k - begin) * DN;
            const double* em1k = em1p + (k - begin) * DN;
            const double* bk = bd.data() + k * N;
            const double* ck = cd.data() + k * N;
            for (std::size_t d = 0; d < D; ++d) {
              const double gyd = gy[k * D + d];
              const double xv = xd[k * D + d];
              const double step = dtd[k * D + d];
              double gstep = 0.0, gxv = 0.0;
              for (std::size_t n = 0; n < N; ++n) {
                const std::size_t i = d * N + n;
                gc[k * N + n] += gyd * hk[i];
                const double ghn = gh[i] + gyd * ck[n];
                const double av = ad[i];
                const double abar = 1.0 + em1k[i];
                const double gain = em1k[i] * inv_a[i];  // (e^z - 1) / A
                const double g_abar = ghn * hprev[i];
                const double g_gain = ghn * bk[n] * xv;
                // d abar/d step = A abar;  d gain/d step = abar
                gstep += g_abar * av * abar + g_gain * abar;
                // d abar/dA = step abar;  d gain/dA = (step abar - gain) / A
                ga[i] += g_abar * step * abar + g_gain * (step * abar - gain) * inv_a[i];
                gb[k * N + n] += ghn * gain * xv;
                gxv += ghn * gain * bk[n];
                gh[i] = ghn * abar;
              }
              gx[k * D + d] += gxv;
              gdt[k * D + d] += gstep;
            }
          }
        }
        auto accumulate = [](const Tensor& t, const std::vector<double>& g) {
          if (!t.requires_grad()) return;
          Tensor tt = t;
          auto buf = tt.grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
        };
        accumulate(x, gx);
        accumulate(delta, gdt);
        accumulate(a, ga);
        accumulate(b, gb);
        accumulate(c, gc);
      });
}

Tensor s6_scan(const Tensor& x, const SsmParams& p, const Tensor& h0, Tensor* final_state) {
  if (x.rank() != 2 || x.dim(1) != p.channels())
    throw DimensionError("s6_scan: input " + shape_str(x.shape()) + " does not have " +
                         std::to_string(p.channels()) + " channels");
  auto proj = selective_params(x, p);
  Tensor y = selective_scan(x, proj.delta, materialize_a(p), proj.b, proj.c, h0, final_state);
  if (p.d_skip.defined()) y = add(y, mul_channel(x, p.d_skip));
  return y;
}

Tensor s6_scan_chunked(const Tensor& x, const SsmParams& p, std::size_t chunk) {
  if (chunk == 0) throw ParameterError("s6_scan_chunked: chunk must be positive");
  NoGradGuard guard;
  const auto L = x.dim(0), D = x.dim(1);
  std::vector<double> out;
  out.reserve(L * D);
  Tensor state;
  for (std::size_t begin = 0; begin < L; begin += chunk) {
    std::vector<std::size_t> rows(std::min(chunk, L - begin));
    std::iota(rows.begin(), rows.end(), begin);
    Tensor next;
    Tensor y = s6_scan(gather_rows(x, rows), p, state, &next);
    out.insert(out.end(), y.data().begin(), y.data().end());
    state = next;
  }
  return Tensor({L, D}, std::move(out));
}

}  // namespace hwm
