// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <variant>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/layers/activation.hpp"
#include "cuenet/layers/batchnorm.hpp"
#include "cuenet/layers/conv2d.hpp"
#include "cuenet/layers/pooling.hpp"
#include "cuenet/layers/softmax.hpp"
#include "cuenet/random.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet {

using layers::NormStatistics;
using layers::Phase;

enum class CueNetVersion : std::uint8_t { v1 = 1, v2 = 2 };

inline std::size_t input_channels(CueNetVersion v) { return v == CueNetVersion::v1 ? 1 : 3; }

inline std::string to_string(CueNetVersion v) { return v == CueNetVersion::v1 ? "v1" : "v2"; }

inline CueNetVersion parse_version(const std::string& s) {
  if (s == "v1" || s == "V1" || s == "1") return CueNetVersion::v1;
  if (s == "v2" || s == "V2" || s == "2") return CueNetVersion::v2;
  throw ConfigError("unknown network version '" + s + "' (expected v1 or v2)");
}

/// Positive rational factor applied to the configured input height and width.
struct Scale {
  std::uint32_t num = 1;
  std::uint32_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  std::size_t apply(std::size_t extent) const {
    if (num == 0 || den == 0) throw ConfigError("scale must be a positive rational");
    if ((extent * num) % den != 0) {
      throw ConfigError("scale " + std::to_string(num) + "/" + std::to_string(den) + " does not divide extent " +
                        std::to_string(extent));
    }
    return extent * num / den;
  }

  /// Parses "n/d" or a plain integer.
  static Scale parse(const std::string& text) {
    Scale s;
    const auto slash = text.find('/');
    try {
      if (slash == std::string::npos) {
        s.num = static_cast<std::uint32_t>(std::stoul(text));
      } else {
        s.num = static_cast<std::uint32_t>(std::stoul(text.substr(0, slash)));
        s.den = static_cast<std::uint32_t>(std::stoul(text.substr(slash + 1)));
      }
    } catch (const std::exception&) {
      throw ConfigError("cannot parse scale '" + text + "'");
    }
    if (s.num == 0 || s.den == 0) throw ConfigError("scale must be a positive rational, got '" + text + "'");
    return s;
  }
};

/// Conv1..Conv13 output depths of the full-size network.
inline std::vector<std::size_t> default_widths() { return {64, 64, 128, 128, 256, 256, 256, 128, 128, 128, 64, 64, 64}; }

inline std::vector<std::size_t> divided_widths(std::size_t divisor) {
  if (divisor == 0) throw ConfigError("width divisor must be positive");
  auto w = default_widths();
  for (auto& v : w) v = std::max<std::size_t>(1, v / divisor);
  return w;
}

struct NetworkConfig {
  CueNetVersion version = CueNetVersion::v2;
  std::size_t height = 180;
  std::size_t width = 240;
  std::vector<std::size_t> widths = default_widths();
  Scale scale{};
  /// Statistics used by batch normalisation in Phase::eval.
  NormStatistics eval_statistics = NormStatistics::per_sample;

  /// Input geometry after scaling; channel count follows the version.
  Shape2D input_shape() const { return Shape2D(scale.apply(height), scale.apply(width), input_channels(version)); }

  void validate() const {
    if (widths.size() != 13) throw ConfigError("expected 13 stage widths, got " + std::to_string(widths.size()));
    for (auto w : widths)
      if (w == 0) throw ConfigError("stage widths must be positive");
    if (height == 0 || width == 0) throw ConfigError("input extents must be positive");
    const Shape2D s = input_shape();
    if (s.height % 4 != 0 || s.width % 4 != 0) {
      throw ConfigError("input " + std::to_string(s.width) + "x" + std::to_string(s.height) +
                        " is not divisible by 4 (two 2x2 poolings)");
    }
  }

  /// Ratio of the input width to the full 240-pixel frame.
  double resolution_ratio() const { return static_cast<double>(input_shape().width) / 240.0; }

  friend bool operator==(const NetworkConfig& a, const NetworkConfig& b) {
    return a.version == b.version && a.input_shape() == b.input_shape() && a.widths == b.widths;
  }
};

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

struct StageShape {
  std::string name;
  Dims output;
};

/// CueNet: VGG-style encoder (Conv1-7, two max pools) and a mirrored decoder
/// (two nearest-neighbour upsamplings, Conv8-13), each conv followed by ReLU
/// and batch normalisation, then a 1x1 projection to one channel and a
/// spatial softmax.
template <typename T>
class Network {
public:
  using Stage = std::variant<layers::Conv2d<T>, layers::Relu<T>, layers::BatchNorm<T>, layers::MaxPool2x2<T>,
                             layers::Upsample2x2<T>, layers::SpatialSoftmax<T>>;

  struct NamedStage {
    std::string name;
    Stage stage;
  };

  static Network build(const NetworkConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Network net(cfg);
    SplitMix64 rng(seed);
    const auto& w = cfg.widths;
    std::size_t channels = input_channels(cfg.version);
    std::size_t conv_index = 0;
    auto add_conv_block = [&](std::size_t out) {
      const std::string name = "conv" + std::to_string(++conv_index);
      layers::Conv2d<T> conv(channels, out, 3);
      conv.init_kaiming(rng);
      net.stages_.push_back({name, std::move(conv)});
      net.stages_.push_back({name + ".relu", layers::Relu<T>{}});
      net.stages_.push_back({name + ".bn", layers::BatchNorm<T>(out)});
      channels = out;
    };
    add_conv_block(w[0]);
    add_conv_block(w[1]);
    net.stages_.push_back({"pool1", layers::MaxPool2x2<T>{}});
    add_conv_block(w[2]);
    add_conv_block(w[3]);
    net.stages_.push_back({"pool2", layers::MaxPool2x2<T>{}});
    add_conv_block(w[4]);
    add_conv_block(w[5]);
    add_conv_block(w[6]);
    net.stages_.push_back({"ups1", layers::Upsample2x2<T>{}});
    add_conv_block(w[7]);
    add_conv_block(w[8]);
    add_conv_block(w[9]);
    net.stages_.push_back({"ups2", layers::Upsample2x2<T>{}});
    add_conv_block(w[10]);
    add_conv_block(w[11]);
    add_conv_block(w[12]);
    layers::Conv2d<T> head(channels, 1, 1);
    head.init_kaiming(rng);
    net.stages_.push_back({"head", std::move(head)});
    net.stages_.push_back({"softmax", layers::SpatialSoftmax<T>{}});
    return net;
  }

  const NetworkConfig& config() const { return config_; }
  const std::vector<NamedStage>& stages() const { return stages_; }
  std::vector<NamedStage>& stages() { return stages_; }

  /// Heatmap [1,H,W]. Phase::train normalises with per-sample statistics and
  /// updates running averages; Phase::eval uses config().eval_statistics.
  Tensor<T> forward(const Tensor<T>& input, Phase phase = Phase::eval) {
    const Shape2D s = config_.input_shape();
    if (input.dims() != s.chw()) {
      throw ShapeError("network input " + dims_to_string(input.dims()) + " does not match " +
                       dims_to_string(s.chw()));
    }
    Tensor<T> x = input;
    for (auto& st : stages_) {
      x = std::visit(
          [&](auto& layer) -> Tensor<T> {
            using L = std::decay_t<decltype(layer)>;
            if constexpr (std::is_same_v<L, layers::BatchNorm<T>>) {
              return layer.forward(x, phase, config_.eval_statistics);
            } else {
              return layer.forward(x);
            }
          },
          st.stage);
    }
    forward_pending_ = true;
    return x;
  }

  /// Backpropagates dL/d(heatmap) and adds every parameter gradient into the
  /// grad accumulators.
  void backward(const Tensor<T>& heatmap_grad) {
    if (!forward_pending_) throw StateError("network backward requires a forward pass since the last backward");
    Tensor<T> g = heatmap_grad;
    for (std::size_t i = stages_.size(); i-- > 0;) {
      const bool first = i == 0;
      g = std::visit(
          [&](auto& layer) -> Tensor<T> {
            using L = std::decay_t<decltype(layer)>;
            if constexpr (std::is_same_v<L, layers::Conv2d<T>>) {
              // Nothing consumes the input gradient of the first stage.
              return layer.backward(g, !first);
            } else {
              return layer.backward(g);
            }
          },
          stages_[i].stage);
    }
    forward_pending_ = false;
  }

  std::vector<ParamRef<T>> parameters() {
    std::vector<ParamRef<T>> out;
    for (auto& st : stages_) {
      if (auto* c = std::get_if<layers::Conv2d<T>>(&st.stage)) {
        out.push_back({st.name + ".weight", &c->weight, &c->grad_weight});
        out.push_back({st.name + ".bias", &c->bias, &c->grad_bias});
      } else if (auto* b = std::get_if<layers::BatchNorm<T>>(&st.stage)) {
        out.push_back({st.name + ".gamma", &b->params.gamma, &b->grad_gamma});
        out.push_back({st.name + ".beta", &b->params.beta, &b->grad_beta});
      }
    }
    return out;
  }

  /// Every persisted tensor in checkpoint order: conv weight and bias,
  /// normalisation gamma, beta, running mean and running variance.
  std::vector<std::pair<std::string, Tensor<T>*>> state_tensors() {
    std::vector<std::pair<std::string, Tensor<T>*>> out;
    for (auto& st : stages_) {
      if (auto* c = std::get_if<layers::Conv2d<T>>(&st.stage)) {
        out.emplace_back(st.name + ".weight", &c->weight);
        out.emplace_back(st.name + ".bias", &c->bias);
      } else if (auto* b = std::get_if<layers::BatchNorm<T>>(&st.stage)) {
        out.emplace_back(st.name + ".gamma", &b->params.gamma);
        out.emplace_back(st.name + ".beta", &b->params.beta);
        out.emplace_back(st.name + ".running_mean", &b->params.running_mean);
        out.emplace_back(st.name + ".running_var", &b->params.running_var);
      }
    }
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto& p : parameters()) n += p.value->size();
    return n;
  }

  void zero_grad() {
    for (auto& p : parameters()) p.grad->fill(T{0});
  }

  void scale_grads(T factor) {
    for (auto& p : parameters()) *p.grad *= factor;
  }

  /// Test hook: every ReLU negates its backward result.
  void inject_relu_fault(bool on) {
    for (auto& st : stages_)
      if (auto* r = std::get_if<layers::Relu<T>>(&st.stage)) r->flip_backward_sign = on;
  }

  /// ReLU on/off states and max-pool winners of the last forward pass. Two
  /// passes with equal patterns ran through the same piecewise-smooth region.
  std::vector<std::size_t> switch_pattern() const {
    std::vector<std::size_t> out;
    for (const auto& st : stages_) {
      if (const auto* r = std::get_if<layers::Relu<T>>(&st.stage)) {
        if (!r->cached_input()) throw StateError("switch_pattern needs a forward pass");
        for (T z : *r->cached_input()) out.push_back(z > T{0} ? 1 : 0);
      } else if (const auto* p = std::get_if<layers::MaxPool2x2<T>>(&st.stage)) {
        if (!p->cached_indices()) throw StateError("switch_pattern needs a forward pass");
        out.insert(out.end(), p->cached_indices()->argmax.begin(), p->cached_indices()->argmax.end());
      }
    }
    return out;
  }

  /// FNV-1a over the bytes of all persisted tensors.
  std::uint64_t checksum() {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto& [name, t] : state_tensors()) {
      const auto* bytes = reinterpret_cast<const unsigned char*>(t->data());
      for (std::size_t i = 0; i < t->size() * sizeof(T); ++i) {
        h ^= bytes[i];
        h *= 1099511628211ULL;
      }
    }
    return h;
  }

  /// Per-stage output dims derived from the configuration without running data.
  std::vector<StageShape> shape_trace() const {
    Dims d = config_.input_shape().chw();
    std::vector<StageShape> out;
    out.push_back({"input", d});
    for (const auto& st : stages_) {
      std::visit(
          [&](const auto& layer) {
            using L = std::decay_t<decltype(layer)>;
            if constexpr (std::is_same_v<L, layers::Conv2d<T>>) {
              d = {layer.out_channels(), d[1], d[2]};
            } else if constexpr (std::is_same_v<L, layers::MaxPool2x2<T>>) {
              d = {d[0], d[1] / 2, d[2] / 2};
            } else if constexpr (std::is_same_v<L, layers::Upsample2x2<T>>) {
              d = {d[0], d[1] * 2, d[2] * 2};
            }
          },
          st.stage);
      out.push_back({st.name, d});
    }
    return out;
  }

  /// Copies parameters and running statistics from a network of the same
  /// configuration, possibly of another precision.
  template <typename U>
  void copy_state_from(Network<U>& other) {
    auto dst = state_tensors();
    auto src = other.state_tensors();
    if (dst.size() != src.size()) throw ShapeError("copy_state_from: networks differ in structure");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      if (dst[i].second->dims() != src[i].second->dims()) throw ShapeError("copy_state_from: tensor dims differ");
      for (std::size_t k = 0; k < dst[i].second->size(); ++k)
        dst[i].second->data()[k] = static_cast<T>(src[i].second->data()[k]);
    }
  }

private:
  explicit Network(NetworkConfig cfg) : config_(std::move(cfg)) {}

  NetworkConfig config_;
  std::vector<NamedStage> stages_;
  bool forward_pending_ = false;
};

template <typename T>
Network<T> build_network(const NetworkConfig& cfg, std::uint64_t seed) {
  return Network<T>::build(cfg, seed);
}

}  // namespace cuenet
