// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>

#include "cuenet/checkpoint.hpp"
#include "cuenet/loss.hpp"
#include "cuenet/network.hpp"
#include "cuenet/train/gradcheck.hpp"
#include "test_util.hpp"

namespace cuenet {
namespace {

using testing::random_tensor;
using testing::TempDir;

NetworkConfig small_config(CueNetVersion v = CueNetVersion::v2) {
  NetworkConfig cfg;
  cfg.version = v;
  cfg.height = 12;
  cfg.width = 16;
  cfg.widths = {2, 2, 4, 4, 4, 2, 2, 2, 2, 2, 2, 2, 2};
  return cfg;
}

TEST(NetworkConfig, DivisibilityRule) {
  NetworkConfig cfg;
  cfg.version = CueNetVersion::v1;
  cfg.scale = Scale{1, 4};
  EXPECT_THROW(cfg.validate(), ConfigError);  // 180/4 = 45 rows, not divisible by 4
  cfg.scale = Scale{};
  cfg.height = 44;
  cfg.width = 60;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.input_shape().chw(), (Dims{1, 44, 60}));
  cfg.widths[3] = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.widths.pop_back();
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(NetworkConfig, ScaleParsing) {
  EXPECT_EQ(Scale::parse("1/4").apply(240), 60u);
  EXPECT_EQ(Scale::parse("2").apply(3), 6u);
  EXPECT_THROW(Scale::parse("1/0"), ConfigError);
  EXPECT_THROW(Scale::parse("x"), ConfigError);
  EXPECT_THROW(Scale::parse("1/7").apply(240), ConfigError);
  EXPECT_EQ(parse_version("v1"), CueNetVersion::v1);
  EXPECT_THROW(parse_version("v3"), ConfigError);
}

TEST(Network, FullScaleShapeTraceMatchesLayerTable) {
  NetworkConfig cfg;  // V2, 240x180, default widths
  const auto net = build_network<float>(cfg, 1);
  const auto trace = net.shape_trace();
  ASSERT_EQ(trace.front().output, (Dims{3, 180, 240}));
  ASSERT_EQ(trace.back().output, (Dims{1, 180, 240}));

  std::vector<std::size_t> conv_depths;
  std::vector<std::pair<std::size_t, std::size_t>> spatial;
  for (const auto& s : trace) {
    if (s.name.rfind("conv", 0) == 0 && s.name.find('.') == std::string::npos) conv_depths.push_back(s.output[0]);
    if (spatial.empty() || spatial.back() != std::make_pair(s.output[1], s.output[2]))
      spatial.emplace_back(s.output[1], s.output[2]);
    if (s.name == "conv5") EXPECT_EQ(s.output, (Dims{256, 45, 60}));
  }
  EXPECT_EQ(conv_depths, (std::vector<std::size_t>{64, 64, 128, 128, 256, 256, 256, 128, 128, 128, 64, 64, 64}));
  const std::vector<std::pair<std::size_t, std::size_t>> expect_spatial = {
      {180, 240}, {90, 120}, {45, 60}, {90, 120}, {180, 240}};
  EXPECT_EQ(spatial, expect_spatial);
}

TEST(Network, V2FullScaleForwardIsHeatmap) {
  NetworkConfig cfg;
  cfg.widths = divided_widths(16);
  auto net = build_network<float>(cfg, 3);
  SplitMix64 rng(3);
  const auto out = net.forward(random_tensor<float>({3, 180, 240}, rng, 0, 1));
  EXPECT_EQ(out.dims(), (Dims{1, 180, 240}));
  double s = 0.0;
  for (float v : out) s += v;
  EXPECT_NEAR(s, 1.0, 1e-5);
}

TEST(Network, SameSeedSameParameters) {
  auto a = build_network<float>(small_config(), 42);
  auto b = build_network<float>(small_config(), 42);
  auto c = build_network<float>(small_config(), 43);
  EXPECT_EQ(a.checksum(), b.checksum());
  EXPECT_NE(a.checksum(), c.checksum());
}

TEST(Network, OutputIsProbabilityDistribution) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto net = build_network<double>(small_config(), seed);
    SplitMix64 rng(seed * 7);
    const auto out = net.forward(random_tensor<double>({3, 12, 16}, rng, -2, 2), seed % 2 ? Phase::train : Phase::eval);
    double s = 0.0;
    for (double v : out) {
      EXPECT_GE(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-6);
  }
}

TEST(Network, ZeroWeightsGiveUniformHeatmap) {
  auto net = build_network<double>(small_config(), 1);
  for (auto& p : net.parameters())
    if (p.name.find(".bn.") == std::string::npos) p.value->fill(0.0);
  const auto out = net.forward(Tensor<double>({3, 12, 16}));
  for (double v : out) EXPECT_NEAR(v, 1.0 / 192.0, 1e-15);
}

TEST(Network, ForwardIsPureAndChecksInput) {
  auto net = build_network<float>(small_config(), 5);
  SplitMix64 rng(5);
  const auto x = random_tensor<float>({3, 12, 16}, rng);
  EXPECT_EQ(net.forward(x), net.forward(x));
  EXPECT_THROW(net.forward(Tensor<float>({1, 12, 16})), ShapeError);
  EXPECT_THROW(net.forward(Tensor<float>({3, 16, 12})), ShapeError);
}

TEST(Network, BackwardRequiresForward) {
  auto net = build_network<double>(small_config(), 5);
  EXPECT_THROW(net.backward(Tensor<double>({1, 12, 16})), StateError);
  net.forward(Tensor<double>({3, 12, 16}, 0.5), Phase::train);
  net.backward(Tensor<double>({1, 12, 16}));
  EXPECT_THROW(net.backward(Tensor<double>({1, 12, 16})), StateError);
}

TEST(Network, ZeroUpstreamGivesZeroGrads) {
  auto net = build_network<double>(small_config(), 6);
  SplitMix64 rng(6);
  net.forward(random_tensor<double>({3, 12, 16}, rng), Phase::train);
  net.backward(Tensor<double>({1, 12, 16}));
  for (const auto& p : net.parameters())
    for (double g : *p.grad) EXPECT_EQ(g, 0.0) << p.name;
}

TEST(Network, RepeatedPassesGiveIdenticalGrads) {
  auto net = build_network<double>(small_config(), 8);
  SplitMix64 rng(8);
  const auto x = random_tensor<double>({3, 12, 16}, rng);
  const auto up = random_tensor<double>({1, 12, 16}, rng);
  std::vector<Tensor<double>> first;
  for (int pass = 0; pass < 2; ++pass) {
    net.zero_grad();
    net.forward(x, Phase::train);
    net.backward(up);
    std::vector<Tensor<double>> grads;
    for (const auto& p : net.parameters()) grads.push_back(*p.grad);
    if (pass == 0) {
      first = grads;
    } else {
      EXPECT_EQ(first, grads);
    }
  }
}

TEST(Network, EightByEightNetMatchesFiniteDifferences) {
  NetworkConfig cfg = small_config();
  cfg.height = 8;
  cfg.width = 8;
  auto net = build_network<double>(cfg, 1);
  SplitMix64 rng(99);
  const auto x = random_tensor<double>({3, 8, 8}, rng, 0, 1);
  const auto label = data::gaussian_heatmap<double>({3.2, 4.7}, 1.5, 8, 8);
  ASSERT_GT(train::l1_relative_margin(net.forward(x, Phase::train), label), 1e-3);
  train::GradCheckOptions opt;
  opt.samples = 50;
  const auto report = train::grad_check_network(net, x, label, opt);
  EXPECT_EQ(report.entries.size(), 50u);
  EXPECT_TRUE(report.passed()) << report.summary();
}

TEST(Network, InjectedReluFaultIsCaught) {
  train::GradCheckOptions opt;
  EXPECT_TRUE(train::cuenet_suite<double>(1, opt).passed());
  EXPECT_FALSE(train::cuenet_suite<double>(1, opt, true).passed());
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto net = build_network<float>(small_config(), 11);
  SplitMix64 rng(11);
  const auto x = random_tensor<float>({3, 12, 16}, rng);
  net.forward(x, Phase::train);  // moves running statistics away from their defaults
  TempDir dir("ckpt");
  save_checkpoint(net, dir.path() / "a.cue");
  auto loaded = load_checkpoint<float>(dir.path() / "a.cue");
  EXPECT_EQ(loaded.checksum(), net.checksum());
  EXPECT_EQ(loaded.forward(x), net.forward(x));
  EXPECT_EQ(serialize_checkpoint(loaded), serialize_checkpoint(net));
  EXPECT_EQ(loaded.config(), net.config());
}

TEST(Checkpoint, DetectsCorruption) {
  auto net = build_network<float>(small_config(), 12);
  auto bytes = serialize_checkpoint(net);
  for (std::size_t pos : {std::size_t{7}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[pos] ^= 0x10;
    try {
      deserialize_checkpoint<float>(bad);
      FAIL() << "corruption at byte " << pos << " went unnoticed";
    } catch (const CheckpointError& e) {
      EXPECT_EQ(e.kind(), CheckpointErrorKind::crc_mismatch);
    }
  }
  auto magic = bytes;
  magic[0] = 'X';
  try {
    deserialize_checkpoint<float>(magic);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::bad_magic);
  }
  try {
    load_checkpoint<float>("/nonexistent/dir/x.cue");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::io);
  }
}

TEST(Checkpoint, RejectsIncompatibleConfig) {
  auto v1 = build_network<float>(small_config(CueNetVersion::v1), 1);
  const auto bytes = serialize_checkpoint(v1);
  try {
    deserialize_checkpoint<float>(bytes, small_config(CueNetVersion::v2));
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::config_incompatible);
  }
  auto other = small_config(CueNetVersion::v1);
  other.widths[0] = 3;
  EXPECT_THROW(deserialize_checkpoint<float>(bytes, other), CheckpointError);
  EXPECT_NO_THROW(deserialize_checkpoint<float>(bytes, small_config(CueNetVersion::v1)));
}

}  // namespace
}  // namespace cuenet
