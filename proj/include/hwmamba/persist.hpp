// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hwmamba/net.hpp"
#include "hwmamba/optim.hpp"

namespace hwm {

inline constexpr int kModelFormatVersion = 1;

/// Everything needed to rebuild a network and continue training it.
struct ModelState {
  NetConfig config;
  std::vector<std::pair<std::string, Tensor>> tensors;  // named_parameters() order
  std::uint64_t step = 0;
  std::optional<AdamState> optimizer;
  nlohmann::json meta = nlohmann::json::object();  // free-form run info (epoch, classes...)
};

ModelState capture(const HWMambaNet& net, std::uint64_t step = 0,
                   const AdamState* optimizer = nullptr);
/// Copies stored values into `net`; DataError on a name or shape mismatch.
void restore(const ModelState& state, HWMambaNet& net);

/// <dir>/model.json manifest (config, names, shapes, dtype, byte offsets,
/// format version) plus <dir>/model.bin holding little-endian float64 values:
/// every parameter, then the Adam moments when present.
void save_model(const ModelState& state, const std::filesystem::path& dir);
ModelState load_model(const std::filesystem::path& dir);

}  // namespace hwm
