// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "hwmamba/ssm.hpp"
#include "hwmamba/tensor.hpp"

namespace hwm {

/// Channel-first 2D feature map [C x H x W]; H is the lead axis, W is time.
class FeatureMap {
 public:
  FeatureMap() = default;
  explicit FeatureMap(Tensor data);

  const Tensor& tensor() const { return data_; }
  Tensor& tensor() { return data_; }
  std::size_t channels() const { return data_.dim(0); }
  std::size_t height() const { return data_.dim(1); }
  std::size_t width() const { return data_.dim(2); }
  Shape shape() const { return data_.shape(); }

 private:
  Tensor data_;
};

enum class ScanDirection { LeftToRight = 0, TopToBottom = 1, RightToLeft = 2, BottomToTop = 3 };

inline constexpr std::array<ScanDirection, 4> kAllDirections{
    ScanDirection::LeftToRight, ScanDirection::TopToBottom, ScanDirection::RightToLeft,
    ScanDirection::BottomToTop};

std::string_view to_string(ScanDirection dir);

/// order[i] = row-major grid index (h * W + w) visited at sequence position i.
std::vector<std::size_t> scan_order(std::size_t height, std::size_t width, ScanDirection dir);
/// inverse[g] = sequence position of grid cell g.
std::vector<std::size_t> inverse_order(const std::vector<std::size_t>& order);

/// [C x H x W] <-> [H*W x C] in row-major grid order.
Tensor map_to_tokens(const Tensor& map);
Tensor tokens_to_map(const Tensor& tokens, std::size_t height, std::size_t width);

/// [C x H x W] -> [L x C], L = H*W, in the given direction's visiting order.
Tensor serialize(const FeatureMap& map, ScanDirection dir);
FeatureMap deserialize(const Tensor& seq, std::size_t height, std::size_t width, ScanDirection dir);

/// S6 forward plus S6 on the reversed sequence (re-reversed), summed.
Tensor bidirectional_scan(const Tensor& x, const SsmParams& fwd, const SsmParams& bwd);

/// Parameters per direction, indexed by ScanDirection.
using CrossScanParams = std::array<SsmParams, 4>;

/// Four-direction cross-scan; the deserialized outputs are summed.
FeatureMap ss2d(const FeatureMap& map, const CrossScanParams& params);
/// Same operation on tokens [H*W x C] in row-major grid order.
Tensor ss2d_tokens(const Tensor& tokens, std::size_t height, std::size_t width,
                   const CrossScanParams& params);

}  // namespace hwm
