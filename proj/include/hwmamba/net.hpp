// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hwmamba/ops.hpp"
#include "hwmamba/random.hpp"
#include "hwmamba/scan2d.hpp"
#include "hwmamba/ssm.hpp"

namespace hwm {

enum class MlpKind { Gated, Plain };

/// Architecture hyperparameters. Every ablation variant is a NetConfig.
struct NetConfig {
  std::vector<std::size_t> depths{2, 2, 2, 8};
  std::vector<std::size_t> dims{48, 96, 192, 384};
  std::size_t patch_kernel_h = 3, patch_kernel_w = 16;
  std::size_t patch_stride_h = 1, patch_stride_w = 16;
  std::size_t down_stride_h = 1, down_stride_w = 2;
  std::size_t state_dim = 16;
  std::size_t ssm_expand = 2;
  std::size_t mlp_expand = 4;
  std::size_t dt_rank = 0;  // 0 selects max(1, D / 16)
  MlpKind mlp_kind = MlpKind::Gated;
  std::size_t num_classes = 26;
  std::size_t leads = 12;
  std::size_t input_len = 8192;
  bool normalize_input = false;
  bool d_skip = false;
  bool share_scan_weights = false;
  double ln_eps = 1e-5;

  static NetConfig paper() { return {}; }
  /// dims [4,8,16,32], depths [1,1,1,2], 12 x 256 input, 4 classes.
  static NetConfig micro();

  std::size_t rank_for(std::size_t channels) const;
  void validate() const;  // throws ConfigError
};

void to_json(nlohmann::json& j, const NetConfig& c);
void from_json(const nlohmann::json& j, NetConfig& c);

struct LinearLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
  Tensor operator()(const Tensor& x) const { return linear(x, weight, bias); }
};

struct NormLayer {
  Tensor gamma, beta;
};

struct ConvLayer {
  Tensor weight, bias;
  Conv2dOptions options;
};

struct MlpParams {
  MlpKind kind = MlpKind::Gated;
  LinearLayer fc_in;   // value branch, C -> eC
  LinearLayer gate;    // gated only, C -> eC
  LinearLayer fc_out;  // eC -> C
};

struct BlockParams {
  NormLayer norm1;
  LinearLayer in_proj;  // C -> 2C
  ConvLayer dwconv;     // depthwise 3x3 on 2C channels
  CrossScanParams ssm;
  LinearLayer out_proj;  // 2C -> C
  NormLayer norm2;
  MlpParams mlp;
};

struct DownsampleParams {
  ConvLayer conv;  // 3x3, C -> 2C
  NormLayer norm;
};

struct ClassifierParams {
  NormLayer norm;
  LinearLayer fc;
};

/// The hierarchical network: patch embedding, four stages of blocks joined by
/// downsampling, and the multi-label head.
class HWMambaNet {
 public:
  explicit HWMambaNet(NetConfig cfg, std::uint64_t seed = 0);

  const NetConfig& config() const { return cfg_; }

  /// Every learnable tensor under a stable hierarchical name, in a fixed order.
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;

  ConvLayer patch;
  std::vector<std::vector<BlockParams>> stages;
  std::vector<DownsampleParams> downsamples;  // between consecutive stages
  ClassifierParams head;

 private:
  NetConfig cfg_;
};

/// [1 x leads x T] -> [dims[0] x leads x T/stride_w].
FeatureMap patch_embed(const Tensor& x, const HWMambaNet& net);
FeatureMap hwmamba_block(const FeatureMap& m, const BlockParams& p, const NetConfig& cfg);
/// tokens [... x C] -> [... x C]
Tensor gated_mlp(const Tensor& x, const MlpParams& p);
/// [C x H x W] -> [2C x H/sh x W/sw]; H and W must be multiples of the stride.
FeatureMap downsample(const FeatureMap& m, const DownsampleParams& p, const NetConfig& cfg);
/// [C x H x W] -> logits [num_classes]
Tensor classify_logits(const FeatureMap& m, const ClassifierParams& p, const NetConfig& cfg);
/// Sigmoid of classify_logits; every output in (0, 1).
Tensor classify(const FeatureMap& m, const ClassifierParams& p, const NetConfig& cfg);

/// Shapes observed after patch embedding and after each downsampling stage.
using ShapeTrace = std::vector<Shape>;

Tensor forward_logits(const Tensor& x, const HWMambaNet& net, ShapeTrace* trace = nullptr);
Tensor forward(const Tensor& x, const HWMambaNet& net, ShapeTrace* trace = nullptr);
/// Independent forward passes over [B x 1 x leads x T]; returns [B x classes] probabilities.
Tensor forward_batch(const Tensor& batch, const HWMambaNet& net);

/// Mean binary cross-entropy over classes from logits, logits clamped to +-30.
/// Targets must be exactly 0 or 1 (DataError otherwise).
Tensor bce_loss(const Tensor& logits, const Tensor& targets);

/// Parameters in the gate branches alone: sum over blocks of eC*C + eC.
std::size_t gate_parameter_count(const NetConfig& cfg);

}  // namespace hwm
