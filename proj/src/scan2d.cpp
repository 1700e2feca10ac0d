// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/scan2d.hpp"

#include <algorithm>
#include <numeric>

#include "hwmamba/ops.hpp"

namespace hwm {

FeatureMap::FeatureMap(Tensor data) : data_(std::move(data)) {
  if (data_.rank() != 3)
    throw DimensionError("feature map must be [C x H x W], got " + shape_str(data_.shape()));
}

std::string_view to_string(ScanDirection dir) {
  switch (dir) {
    case ScanDirection::LeftToRight: return "left_to_right";
    case ScanDirection::TopToBottom: return "top_to_bottom";
    case ScanDirection::RightToLeft: return "right_to_left";
    case ScanDirection::BottomToTop: return "bottom_to_top";
  }
  return "?";
}

std::vector<std::size_t> scan_order(std::size_t height, std::size_t width, ScanDirection dir) {
  const std::size_t n = height * width;
  std::vector<std::size_t> order(n);
  if (dir == ScanDirection::LeftToRight || dir == ScanDirection::RightToLeft) {
    std::iota(order.begin(), order.end(), 0);
  } else {
    std::size_t i = 0;
    for (std::size_t w = 0; w < width; ++w)
      for (std::size_t h = 0; h < height; ++h) order[i++] = h * width + w;
  }
  if (dir == ScanDirection::RightToLeft || dir == ScanDirection::BottomToTop)
    std::reverse(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> inverse_order(const std::vector<std::size_t>& order) {
  std::vector<std::size_t> inv(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) inv[order[i]] = i;
  return inv;
}

Tensor map_to_tokens(const Tensor& map) {
  if (map.rank() != 3) throw DimensionError("map_to_tokens: expected [C x H x W]");
  const auto c = map.dim(0), h = map.dim(1), w = map.dim(2);
  return reshape(permute(map, {1, 2, 0}), {h * w, c});
}

Tensor tokens_to_map(const Tensor& tokens, std::size_t height, std::size_t width) {
  if (tokens.rank() != 2 || tokens.dim(0) != height * width)
    throw DimensionError("tokens_to_map: " + shape_str(tokens.shape()) + " is not " +
                         std::to_string(height * width) + " tokens");
  const auto c = tokens.dim(1);
  return permute(reshape(tokens, {height, width, c}), {2, 0, 1});
}

Tensor serialize(const FeatureMap& map, ScanDirection dir) {
  return gather_rows(map_to_tokens(map.tensor()), scan_order(map.height(), map.width(), dir));
}

FeatureMap deserialize(const Tensor& seq, std::size_t height, std::size_t width,
                       ScanDirection dir) {
  auto grid = gather_rows(seq, inverse_order(scan_order(height, width, dir)));
  return FeatureMap(tokens_to_map(grid, height, width));
}

Tensor bidirectional_scan(const Tensor& x, const SsmParams& fwd, const SsmParams& bwd) {
  if (x.rank() != 2) throw DimensionError("bidirectional_scan: expected [L x D]");
  std::vector<std::size_t> rev(x.dim(0));
  std::iota(rev.rbegin(), rev.rend(), 0);
  Tensor y_fwd = s6_scan(x, fwd);
  Tensor y_bwd = gather_rows(s6_scan(gather_rows(x, rev), bwd), rev);
  return add(y_fwd, y_bwd);
}

Tensor ss2d_tokens(const Tensor& tokens, std::size_t height, std::size_t width,
                   const CrossScanParams& params) {
  Tensor merged;
  for (auto dir : kAllDirections) {
    const auto order = scan_order(height, width, dir);
    Tensor y = s6_scan(gather_rows(tokens, order), params[static_cast<std::size_t>(dir)]);
    Tensor grid = gather_rows(y, inverse_order(order));
    merged = merged.defined() ? add(merged, grid) : grid;
  }
  return merged;
}

FeatureMap ss2d(const FeatureMap& map, const CrossScanParams& params) {
  Tensor y = ss2d_tokens(map_to_tokens(map.tensor()), map.height(), map.width(), params);
  return FeatureMap(tokens_to_map(y, map.height(), map.width()));
}

}  // namespace hwm
