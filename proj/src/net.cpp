// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/net.hpp"

#include <algorithm>
#include <cmath>

namespace hwm {

using nlohmann::json;

NetConfig NetConfig::micro() {
  NetConfig c;
  c.depths = {1, 1, 1, 2};
  c.dims = {4, 8, 16, 32};
  c.input_len = 256;
  c.num_classes = 4;
  return c;
}

std::size_t NetConfig::rank_for(std::size_t channels) const {
  if (dt_rank) return std::min(dt_rank, channels);
  return std::max<std::size_t>(1, channels / 16);
}

void NetConfig::validate() const {
  if (depths.size() != 4 || dims.size() != 4)
    throw ConfigError("NetConfig: depths and dims must each have 4 entries");
  for (auto v : depths)
    if (v == 0) throw ConfigError("NetConfig: depths must be positive");
  for (auto v : dims)
    if (v == 0) throw ConfigError("NetConfig: dims must be positive");
  for (std::size_t i = 1; i < 4; ++i)
    if (dims[i] != 2 * dims[i - 1])
      throw ConfigError("NetConfig: each stage must double the channel count");
  if (patch_kernel_h == 0 || patch_kernel_w == 0 || patch_stride_h == 0 || patch_stride_w == 0 ||
      down_stride_h == 0 || down_stride_w == 0)
    throw ConfigError("NetConfig: kernels and strides must be positive");
  if (state_dim == 0 || ssm_expand == 0 || mlp_expand == 0)
    throw ConfigError("NetConfig: state_dim, ssm_expand and mlp_expand must be positive");
  if (num_classes == 0 || leads == 0 || input_len == 0)
    throw ConfigError("NetConfig: num_classes, leads and input_len must be positive");
  if (!(ln_eps > 0)) throw ConfigError("NetConfig: ln_eps must be positive");
}

NLOHMANN_JSON_SERIALIZE_ENUM(MlpKind, {{MlpKind::Gated, "gated"}, {MlpKind::Plain, "plain"}})

void to_json(json& j, const NetConfig& c) {
  j = json{{"depths", c.depths},
           {"dims", c.dims},
           {"patch_kernel", {c.patch_kernel_h, c.patch_kernel_w}},
           {"patch_stride", {c.patch_stride_h, c.patch_stride_w}},
           {"down_stride", {c.down_stride_h, c.down_stride_w}},
           {"state_dim", c.state_dim},
           {"ssm_expand", c.ssm_expand},
           {"mlp_expand", c.mlp_expand},
           {"dt_rank", c.dt_rank},
           {"mlp_kind", c.mlp_kind},
           {"num_classes", c.num_classes},
           {"leads", c.leads},
           {"input_len", c.input_len},
           {"normalize_input", c.normalize_input},
           {"d_skip", c.d_skip},
           {"share_scan_weights", c.share_scan_weights},
           {"ln_eps", c.ln_eps}};
}

void from_json(const json& j, NetConfig& c) {
  auto pair = [&](const char* key, std::size_t& a, std::size_t& b) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2) throw ConfigError(std::string(key) + " must be [h, w]");
    a = v[0].get<std::size_t>();
    b = v[1].get<std::size_t>();
  };
  try {
    if (j.contains("depths")) c.depths = j.at("depths").get<std::vector<std::size_t>>();
    if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<std::size_t>>();
    pair("patch_kernel", c.patch_kernel_h, c.patch_kernel_w);
    pair("patch_stride", c.patch_stride_h, c.patch_stride_w);
    pair("down_stride", c.down_stride_h, c.down_stride_w);
    if (j.contains("mlp_kind")) {
      const auto kind = j.at("mlp_kind").get<std::string>();
      if (kind != "gated" && kind != "plain") throw ConfigError("mlp_kind must be gated|plain");
      c.mlp_kind = kind == "gated" ? MlpKind::Gated : MlpKind::Plain;
    }
    c.state_dim = j.value("state_dim", c.state_dim);
    c.ssm_expand = j.value("ssm_expand", c.ssm_expand);
    c.mlp_expand = j.value("mlp_expand", c.mlp_expand);
    c.dt_rank = j.value("dt_rank", c.dt_rank);
    c.num_classes = j.value("num_classes", c.num_classes);
    c.leads = j.value("leads", c.leads);
    c.input_len = j.value("input_len", c.input_len);
    c.normalize_input = j.value("normalize_input", c.normalize_input);
    c.d_skip = j.value("d_skip", c.d_skip);
    c.share_scan_weights = j.value("share_scan_weights", c.share_scan_weights);
    c.ln_eps = j.value("ln_eps", c.ln_eps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("NetConfig: ") + e.what());
  }
}

namespace {

LinearLayer make_linear(std::size_t in, std::size_t out, Rng& rng) {
  LinearLayer l{Tensor({out, in}), Tensor::zeros({out})};
  fill_trunc_normal(l.weight, 0.02, rng);
  return l;
}

NormLayer make_norm(std::size_t n) { return {Tensor::ones({n}), Tensor::zeros({n})}; }

ConvLayer make_conv(std::size_t cin, std::size_t cout, std::size_t kh, std::size_t kw,
                    Conv2dOptions opt, Rng& rng) {
  ConvLayer c{Tensor({cout, cin / opt.groups, kh, kw}), Tensor::zeros({cout}), opt};
  fill_trunc_normal(c.weight, 0.02, rng);
  return c;
}

void push_linear(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
                 const LinearLayer& l) {
  out.emplace_back(prefix + ".weight", l.weight);
  out.emplace_back(prefix + ".bias", l.bias);
}

void push_norm(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
               const NormLayer& n) {
  out.emplace_back(prefix + ".gamma", n.gamma);
  out.emplace_back(prefix + ".beta", n.beta);
}

void push_conv(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix,
               const ConvLayer& c) {
  out.emplace_back(prefix + ".weight", c.weight);
  out.emplace_back(prefix + ".bias", c.bias);
}

Tensor norm_tokens(const Tensor& tokens, const NormLayer& n, double eps) {
  return layer_norm(tokens, tokens.dim(1), n.gamma, n.beta, eps);
}

}  // namespace

HWMambaNet::HWMambaNet(NetConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  cfg_.validate();
  Rng rng(seed);
  patch = make_conv(1, cfg_.dims[0], cfg_.patch_kernel_h, cfg_.patch_kernel_w,
                    Conv2dOptions{cfg_.patch_stride_h, cfg_.patch_stride_w, cfg_.patch_kernel_h / 2,
                                  0, 1},
                    rng);
  stages.resize(4);
  for (std::size_t s = 0; s < 4; ++s) {
    const auto c = cfg_.dims[s];
    const auto inner = cfg_.ssm_expand * c;
    const auto hidden = cfg_.mlp_expand * c;
    for (std::size_t b = 0; b < cfg_.depths[s]; ++b) {
      BlockParams blk;
      blk.norm1 = make_norm(c);
      blk.in_proj = make_linear(c, inner, rng);
      blk.dwconv = make_conv(inner, inner, 3, 3, Conv2dOptions{1, 1, 1, 1, inner}, rng);
      if (cfg_.share_scan_weights) {
        auto shared = SsmParams::init(inner, cfg_.state_dim, cfg_.rank_for(inner), rng, cfg_.d_skip);
        blk.ssm.fill(shared);
      } else {
        for (auto& dir : blk.ssm)
          dir = SsmParams::init(inner, cfg_.state_dim, cfg_.rank_for(inner), rng, cfg_.d_skip);
      }
      blk.out_proj = make_linear(inner, c, rng);
      blk.norm2 = make_norm(c);
      blk.mlp.kind = cfg_.mlp_kind;
      blk.mlp.fc_in = make_linear(c, hidden, rng);
      if (cfg_.mlp_kind == MlpKind::Gated) blk.mlp.gate = make_linear(c, hidden, rng);
      blk.mlp.fc_out = make_linear(hidden, c, rng);
      stages[s].push_back(std::move(blk));
    }
    if (s < 3) {
      DownsampleParams d;
      d.conv = make_conv(c, 2 * c, 3, 3,
                         Conv2dOptions{cfg_.down_stride_h, cfg_.down_stride_w, 1, 1, 1}, rng);
      d.norm = make_norm(2 * c);
      downsamples.push_back(std::move(d));
    }
  }
  head.norm = make_norm(cfg_.dims[3]);
  head.fc = make_linear(cfg_.dims[3], cfg_.num_classes, rng);
}

std::vector<std::pair<std::string, Tensor>> HWMambaNet::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  push_conv(out, "patch_embed", patch);
  for (std::size_t s = 0; s < stages.size(); ++s) {
    for (std::size_t b = 0; b < stages[s].size(); ++b) {
      const auto& blk = stages[s][b];
      const std::string p = "stages." + std::to_string(s) + ".blocks." + std::to_string(b);
      push_norm(out, p + ".norm1", blk.norm1);
      push_linear(out, p + ".in_proj", blk.in_proj);
      push_conv(out, p + ".dwconv", blk.dwconv);
      const std::size_t dirs = cfg_.share_scan_weights ? 1 : 4;
      for (std::size_t d = 0; d < dirs; ++d) {
        const std::string dn =
            cfg_.share_scan_weights ? "shared" : std::string(to_string(kAllDirections[d]));
        for (const auto& [name, t] : blk.ssm[d].named())
          out.emplace_back(p + ".ss2d." + dn + "." + name, t);
      }
      push_linear(out, p + ".out_proj", blk.out_proj);
      push_norm(out, p + ".norm2", blk.norm2);
      push_linear(out, p + ".mlp.fc_in", blk.mlp.fc_in);
      if (blk.mlp.kind == MlpKind::Gated) push_linear(out, p + ".mlp.gate", blk.mlp.gate);
      push_linear(out, p + ".mlp.fc_out", blk.mlp.fc_out);
    }
    if (s < downsamples.size()) {
      const std::string p = "downsample." + std::to_string(s);
      push_conv(out, p + ".conv", downsamples[s].conv);
      push_norm(out, p + ".norm", downsamples[s].norm);
    }
  }
  push_norm(out, "head.norm", head.norm);
  push_linear(out, "head.fc", head.fc);
  return out;
}

std::vector<Tensor> HWMambaNet::parameters() const {
  std::vector<Tensor> out;
  for (auto& [_, t] : named_parameters()) out.push_back(t);
  return out;
}

std::size_t HWMambaNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [_, t] : named_parameters()) n += t.numel();
  return n;
}

std::size_t gate_parameter_count(const NetConfig& cfg) {
  if (cfg.mlp_kind != MlpKind::Gated) return 0;
  std::size_t n = 0;
  for (std::size_t s = 0; s < 4; ++s) {
    const auto c = cfg.dims[s], hidden = cfg.mlp_expand * cfg.dims[s];
    n += cfg.depths[s] * (hidden * c + hidden);
  }
  return n;
}

FeatureMap patch_embed(const Tensor& x, const HWMambaNet& net) {
  const auto& cfg = net.config();
  if (x.rank() != 3 || x.dim(0) != 1 || x.dim(1) != cfg.leads)
    throw DimensionError("patch_embed: expected [1 x " + std::to_string(cfg.leads) +
                         " x T], got " + shape_str(x.shape()));
  if (x.dim(2) % cfg.patch_stride_w != 0)
    throw DimensionError("patch_embed: length " + std::to_string(x.dim(2)) +
                         " is not a multiple of the patch stride " +
                         std::to_string(cfg.patch_stride_w));
  return FeatureMap(conv2d(x, net.patch.weight, net.patch.bias, net.patch.options));
}

Tensor gated_mlp(const Tensor& x, const MlpParams& p) {
  Tensor hidden = silu(p.fc_in(x));
  if (p.kind == MlpKind::Gated) hidden = mul(hidden, sigmoid(p.gate(x)));
  return p.fc_out(hidden);
}

FeatureMap hwmamba_block(const FeatureMap& m, const BlockParams& p, const NetConfig& cfg) {
  const auto h = m.height(), w = m.width();
  Tensor tokens = map_to_tokens(m.tensor());

  Tensor t = p.in_proj(norm_tokens(tokens, p.norm1, cfg.ln_eps));
  Tensor mixed = conv2d(tokens_to_map(t, h, w), p.dwconv.weight, p.dwconv.bias, p.dwconv.options);
  Tensor scanned = ss2d_tokens(map_to_tokens(silu(mixed)), h, w, p.ssm);
  tokens = add(tokens, p.out_proj(scanned));

  tokens = add(tokens, gated_mlp(norm_tokens(tokens, p.norm2, cfg.ln_eps), p.mlp));
  return FeatureMap(tokens_to_map(tokens, h, w));
}

FeatureMap downsample(const FeatureMap& m, const DownsampleParams& p, const NetConfig& cfg) {
  const auto sh = p.conv.options.stride_h, sw = p.conv.options.stride_w;
  if (m.height() % sh != 0 || m.width() % sw != 0)
    throw DimensionError("downsample: map " + shape_str(m.shape()) +
                         " is not divisible by stride (" + std::to_string(sh) + ", " +
                         std::to_string(sw) + ")");
  Tensor y = conv2d(m.tensor(), p.conv.weight, p.conv.bias, p.conv.options);
  const auto h = y.dim(1), w = y.dim(2);
  return FeatureMap(tokens_to_map(norm_tokens(map_to_tokens(y), p.norm, cfg.ln_eps), h, w));
}

Tensor classify_logits(const FeatureMap& m, const ClassifierParams& p, const NetConfig& cfg) {
  Tensor tokens = norm_tokens(map_to_tokens(m.tensor()), p.norm, cfg.ln_eps);
  Tensor pooled = reshape(mean(tokens, 0), {1, m.channels()});
  return reshape(p.fc(pooled), {cfg.num_classes});
}

Tensor classify(const FeatureMap& m, const ClassifierParams& p, const NetConfig& cfg) {
  return sigmoid(classify_logits(m, p, cfg));
}

namespace {
std::size_t round_up(std::size_t v, std::size_t m) { return (v + m - 1) / m * m; }
}  // namespace

Tensor forward_logits(const Tensor& x, const HWMambaNet& net, ShapeTrace* trace) {
  const auto& cfg = net.config();
  FeatureMap m = patch_embed(x, net);
  for (std::size_t s = 0; s < 4; ++s) {
    if (s > 0) {
      const auto& ds = net.downsamples[s - 1];
      const auto sh = ds.conv.options.stride_h, sw = ds.conv.options.stride_w;
      // Strides that do not divide the map get zero-filled up to the next multiple.
      m = FeatureMap(pad_end(m.tensor(), round_up(m.height(), sh), round_up(m.width(), sw)));
      m = downsample(m, ds, cfg);
    }
    for (const auto& blk : net.stages[s]) m = hwmamba_block(m, blk, cfg);
    if (trace) trace->push_back(m.shape());
  }
  return classify_logits(m, net.head, cfg);
}

Tensor forward(const Tensor& x, const HWMambaNet& net, ShapeTrace* trace) {
  return sigmoid(forward_logits(x, net, trace));
}

Tensor forward_batch(const Tensor& batch, const HWMambaNet& net) {
  if (batch.rank() != 4) throw DimensionError("forward_batch: expected [B x 1 x leads x T]");
  const auto b = batch.dim(0);
  const Shape sample{batch.dim(1), batch.dim(2), batch.dim(3)};
  std::vector<Tensor> outs;
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<std::size_t> row{i};
    Tensor xi = reshape(gather_rows(batch, row), sample);
    outs.push_back(forward(xi, net));
  }
  return stack(outs);
}

Tensor bce_loss(const Tensor& logits, const Tensor& targets) {
  if (logits.shape() != targets.shape())
    throw DimensionError("bce_loss: logits " + shape_str(logits.shape()) + " vs targets " +
                         shape_str(targets.shape()));
  for (double t : targets.data())
    if (t != 0.0 && t != 1.0) throw DataError("bce_loss: targets must be 0 or 1");
  auto z = logits.data(), t = targets.data();
  const auto n = z.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zc = std::clamp(z[i], -30.0, 30.0);
    total += std::max(zc, 0.0) - zc * t[i] + std::log1p(std::exp(-std::abs(zc)));
  }
  const double loss = total / static_cast<double>(n);
  if (!std::isfinite(loss)) throw NumericError("bce_loss: non-finite loss");
  return make_result({1}, {loss}, "bce_loss", {logits, targets},
                     [logits, targets, n](std::span<const double> g) {
                       if (!logits.requires_grad()) return;
                       Tensor l = logits;
                       auto gl = l.grad_buffer();
                       auto z = logits.data(), t = targets.data();
                       for (std::size_t i = 0; i < n; ++i) {
                         if (z[i] < -30.0 || z[i] > 30.0) continue;
                         gl[i] += g[0] * (sigmoid_scalar(z[i]) - t[i]) / static_cast<double>(n);
                       }
                     });
}

}  // namespace hwm
