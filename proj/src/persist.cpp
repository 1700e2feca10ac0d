// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include "hwmamba/persist.hpp"

#include <bit>
#include <fstream>
#include <iterator>

#include "hwmamba/errors.hpp"

namespace hwm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_values(std::string& blob, std::span<const double> values) {
  for (double v : values) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) blob.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
}

std::vector<double> get_values(const std::string& blob, std::size_t offset, std::size_t count,
                               const std::string& what) {
  if (offset + count * 8 > blob.size()) throw DataError("model.bin too short for " + what);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(blob[offset + i * 8 + b]))
              << (8 * b);
    out[i] = std::bit_cast<double>(bits);
  }
  return out;
}

json entry(const std::string& name, const Shape& shape, std::size_t offset) {
  return json{{"name", name},
              {"shape", shape},
              {"dtype", "float64"},
              {"offset", offset},
              {"nbytes", shape_numel(shape) * 8}};
}

}  // namespace

ModelState capture(const HWMambaNet& net, std::uint64_t step, const AdamState* optimizer) {
  ModelState s;
  s.config = net.config();
  for (const auto& [name, t] : net.named_parameters()) s.tensors.emplace_back(name, t.detach());
  s.step = step;
  if (optimizer) s.optimizer = *optimizer;
  return s;
}

void restore(const ModelState& state, HWMambaNet& net) {
  auto params = net.named_parameters();
  if (params.size() != state.tensors.size())
    throw DataError("model state has " + std::to_string(state.tensors.size()) +
                    " tensors, network expects " + std::to_string(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, src] = state.tensors[i];
    auto& [want, dst] = params[i];
    if (name != want || src.shape() != dst.shape())
      throw DataError("model state tensor " + name + " " + shape_str(src.shape()) +
                      " does not fit " + want + " " + shape_str(dst.shape()));
    auto from = src.data();
    std::copy(from.begin(), from.end(), dst.data().begin());
  }
}

void save_model(const ModelState& state, const fs::path& dir) {
  fs::create_directories(dir);
  std::string blob;
  json tensors = json::array();
  for (const auto& [name, t] : state.tensors) {
    tensors.push_back(entry(name, t.shape(), blob.size()));
    put_values(blob, t.data());
  }
  json manifest{{"format_version", kModelFormatVersion},
                {"config", state.config},
                {"step", state.step},
                {"tensors", tensors},
                {"meta", state.meta}};
  if (state.optimizer) {
    const auto& opt = *state.optimizer;
    if (opt.m.size() != state.tensors.size())
      throw DimensionError("save_model: optimizer state does not match the tensors");
    json moments = json::array();
    for (std::size_t i = 0; i < opt.m.size(); ++i) {
      const Shape flat{opt.m[i].size()};
      json m = entry(state.tensors[i].first + "#m", flat, blob.size());
      put_values(blob, opt.m[i]);
      json v = entry(state.tensors[i].first + "#v", flat, blob.size());
      put_values(blob, opt.v[i]);
      moments.push_back(m);
      moments.push_back(v);
    }
    manifest["optimizer"] = json{{"kind", "adam"}, {"step", opt.step}, {"moments", moments}};
  }
  std::ofstream b(dir / "model.bin", std::ios::binary);
  if (!b) throw DataError("cannot write " + (dir / "model.bin").string());
  b.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream m(dir / "model.json");
  if (!m) throw DataError("cannot write " + (dir / "model.json").string());
  m << manifest.dump(2) << '\n';
  if (!b || !m) throw DataError("short write in " + dir.string());
}

ModelState load_model(const fs::path& dir) {
  std::ifstream m(dir / "model.json");
  if (!m) throw DataError("cannot open " + (dir / "model.json").string());
  std::ifstream b(dir / "model.bin", std::ios::binary);
  if (!b) throw DataError("cannot open " + (dir / "model.bin").string());
  const std::string blob((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  ModelState s;
  try {
    const json manifest = json::parse(m);
    const int version = manifest.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format version " + std::to_string(version));
    from_json(manifest.at("config"), s.config);
    s.step = manifest.at("step").get<std::uint64_t>();
    s.meta = manifest.value("meta", json::object());
    for (const auto& t : manifest.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      if (t.at("dtype").get<std::string>() != "float64")
        throw DataError(name + ": only float64 tensors are supported");
      const auto shape = t.at("shape").get<Shape>();
      s.tensors.emplace_back(name, Tensor(shape, get_values(blob, t.at("offset").get<std::size_t>(),
                                                            shape_numel(shape), name)));
    }
    if (manifest.contains("optimizer")) {
      const auto& o = manifest.at("optimizer");
      AdamState opt;
      opt.step = o.at("step").get<std::uint64_t>();
      const auto& moments = o.at("moments");
      if (moments.size() != 2 * s.tensors.size())
        throw DataError("optimizer moments do not match the tensors");
      for (std::size_t i = 0; i < moments.size(); ++i) {
        const auto& e = moments[i];
        auto values = get_values(blob, e.at("offset").get<std::size_t>(),
                                 shape_numel(e.at("shape").get<Shape>()), e.at("name").get<std::string>());
        (i % 2 == 0 ? opt.m : opt.v).push_back(std::move(values));
      }
      s.optimizer = std::move(opt);
    }
  } catch (const json::exception& e) {
    throw DataError((dir / "model.json").string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError((dir / "model.json").string() + ": " + e.what());
  }
  return s;
}

}  // namespace hwm
