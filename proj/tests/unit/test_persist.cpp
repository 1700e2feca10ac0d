// Copyright 2026 The HWMamba Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "hwmamba/persist.hpp"

using namespace hwm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("hwm_persist_" + name);
  fs::remove_all(dir);
  return dir;
}

bool bit_equal(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Parameters and moments filled with awkward values: subnormals, signed zero,
// long mantissas.
AdamState scramble(HWMambaNet& net, Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto params = net.named_parameters();
  for (auto& [name, t] : params)
    for (auto& v : t.data()) v = u(rng) / 3.0;
  auto first = params.front().second;
  first.data()[0] = -0.0;
  first.data()[1] = 4.9e-324;
  AdamState st;
  st.init(params);
  for (auto& m : st.m)
    for (auto& v : m) v = u(rng) * 1e-7;
  for (auto& m : st.v)
    for (auto& v : m) v = u(rng) * u(rng) * 1e-9;
  st.step = 123456789;
  return st;
}

}  // namespace

TEST_CASE("model state round trip is bit-exact") {
  HWMambaNet net(NetConfig::micro(), 1);
  Rng rng(2);
  AdamState st = scramble(net, rng);
  auto state = capture(net, st.step, &st);
  state.meta = {{"epoch", 4}, {"classes", {"AF", "NSR"}}};
  const auto dir = scratch("roundtrip");
  save_model(state, dir);
  CHECK(fs::exists(dir / "model.json"));
  CHECK(fs::exists(dir / "model.bin"));

  auto back = load_model(dir);
  CHECK(nlohmann::json(back.config) == nlohmann::json(state.config));
  CHECK(back.step == state.step);
  CHECK(back.meta == state.meta);
  REQUIRE(back.tensors.size() == state.tensors.size());
  for (std::size_t i = 0; i < state.tensors.size(); ++i) {
    CHECK(back.tensors[i].first == state.tensors[i].first);
    CHECK(back.tensors[i].second.shape() == state.tensors[i].second.shape());
    for (std::size_t k = 0; k < state.tensors[i].second.numel(); ++k)
      CHECK(bit_equal(back.tensors[i].second[k], state.tensors[i].second[k]));
  }
  REQUIRE(back.optimizer);
  CHECK(back.optimizer->step == st.step);
  CHECK(back.optimizer->m == st.m);
  CHECK(back.optimizer->v == st.v);

  HWMambaNet other(NetConfig::micro(), 99);
  restore(back, other);
  auto a = net.named_parameters(), b = other.named_parameters();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a[i].second.numel(); ++k)
      CHECK(bit_equal(a[i].second[k], b[i].second[k]));
  CHECK(bit_equal(b.front().second[0], -0.0));
}

TEST_CASE("saving twice produces identical files") {
  HWMambaNet net(NetConfig::micro(), 3);
  const auto d1 = scratch("twice1"), d2 = scratch("twice2");
  save_model(capture(net), d1);
  save_model(load_model(d1), d2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(d1 / "model.bin") == slurp(d2 / "model.bin"));
  CHECK(slurp(d1 / "model.json") == slurp(d2 / "model.json"));
}

TEST_CASE("manifest describes every tensor") {
  HWMambaNet net(NetConfig::micro(), 4);
  const auto dir = scratch("manifest");
  save_model(capture(net), dir);
  std::ifstream in(dir / "model.json");
  auto j = nlohmann::json::parse(in);
  CHECK(j.at("format_version") == kModelFormatVersion);
  auto tensors = j.at("tensors");
  REQUIRE(tensors.size() == net.named_parameters().size());
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    CHECK(t.at("dtype") == "float64");
    CHECK(t.at("offset").get<std::size_t>() == offset);
    offset += t.at("nbytes").get<std::size_t>();
  }
  CHECK(fs::file_size(dir / "model.bin") == offset);
  CHECK(offset == 8 * net.parameter_count());
}

TEST_CASE("mismatched or damaged states are data errors") {
  HWMambaNet micro(NetConfig::micro(), 5);
  auto state = capture(micro);

  auto plain_cfg = NetConfig::micro();
  plain_cfg.mlp_kind = MlpKind::Plain;
  HWMambaNet plain(plain_cfg, 5);
  CHECK_THROWS_AS(restore(state, plain), DataError);

  auto wide_cfg = NetConfig::micro();
  wide_cfg.state_dim = 1;
  HWMambaNet narrow(wide_cfg, 5);
  CHECK_THROWS_AS(restore(state, narrow), DataError);

  const auto dir = scratch("damaged");
  save_model(state, dir);
  fs::resize_file(dir / "model.bin", fs::file_size(dir / "model.bin") - 8);
  CHECK_THROWS_AS(load_model(dir), DataError);
  CHECK_THROWS_AS(load_model(scratch("missing")), DataError);
}
