// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/data/heatmap.hpp"
#include "cuenet/layers/dense.hpp"
#include "cuenet/loss.hpp"
#include "cuenet/network.hpp"
#include "cuenet/random.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::train {

using layers::Activation;
using layers::DenseNet;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Parameter entries to check; all of them if the network has fewer.
  std::size_t samples = 50;
  std::uint64_t seed = 1;
  /// Denominator floor so that gradients near zero are compared on an absolute scale.
  double floor = 1e-6;
  /// Extra floor as a fraction of the largest checked gradient; nonzero only
  /// for single-precision analytic gradients, whose round-off scales with it.
  double floor_fraction = 0.0;
};

/// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor = 0.0) {
  const double diff = std::abs(analytic - numeric);
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return denom == 0.0 ? 0.0 : diff / denom;
}

struct GradCheckEntry {
  std::string parameter;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  /// Entries left out because a probe crossed a kink.
  std::size_t skipped = 0;

  double max_rel_error() const {
    double m = 0.0;
    for (const auto& e : entries) m = std::max(m, e.rel_error);
    return m;
  }
  bool passed() const { return !entries.empty() && max_rel_error() < tolerance; }

  const GradCheckEntry* worst() const {
    const GradCheckEntry* w = nullptr;
    for (const auto& e : entries)
      if (w == nullptr || e.rel_error > w->rel_error) w = &e;
    return w;
  }

  void merge(const GradCheckReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    skipped += other.skipped;
  }

  std::string summary() const {
    std::ostringstream os;
    os << "checked=" << entries.size() << " skipped=" << skipped << " max_rel_error=" << max_rel_error() << " tolerance=" << tolerance
       << (passed() ? " PASS" : " FAIL");
    if (const auto* w = worst()) os << " worst=" << w->parameter << "[" << w->index << "]";
    return os.str();
  }
};

/// Smallest |output - label| / max(|output|, |label|) over all elements.
/// L1 has a kink where output equals label; a softmax output moves in
/// proportion to itself, so the distance to the kink is measured relatively.
template <typename T>
double l1_relative_margin(const Tensor<T>& output, const Tensor<T>& label) {
  Tensor<T>::require_same_dims(output, label, "l1_relative_margin");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < output.size(); ++i) {
    const double o = static_cast<double>(output.data()[i]), y = static_cast<double>(label.data()[i]);
    const double scale = std::max(std::abs(o), std::abs(y));
    if (scale > 0.0) m = std::min(m, std::abs(o - y) / scale);
  }
  return m;
}

namespace detail {

/// Central difference of `loss` with respect to *value.
inline double central_difference(double* value, double h, const std::function<double()>& loss) {
  const double saved = *value;
  *value = saved + h;
  const double plus = loss();
  *value = saved - h;
  const double minus = loss();
  *value = saved;
  return (plus - minus) / (2.0 * h);
}

}  // namespace detail

/// Checks every weight and bias of a dense network against central
/// differences for one (input, label) pair.
inline GradCheckReport grad_check_dense(DenseNet<double>& net, const Tensor<double>& x, const Tensor<double>& y,
                                        LossKind kind, const GradCheckOptions& opt) {
  const auto grads = net.gradients(x, y, kind);
  const auto loss = [&] { return net.loss(x, y, kind); };
  GradCheckReport report;
  report.tolerance = opt.tolerance;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    const std::string prefix = "layer" + std::to_string(l + 1);
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
      const double a = grads[l].weight.data()[i];
      const double n = detail::central_difference(&layer.weights.data()[i], opt.step, loss);
      report.entries.push_back({prefix + ".weight", i, a, n, relative_error(a, n, opt.floor)});
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      const double a = grads[l].bias.data()[i];
      const double n = detail::central_difference(&layer.bias.data()[i], opt.step, loss);
      report.entries.push_back({prefix + ".bias", i, a, n, relative_error(a, n, opt.floor)});
    }
  }
  return report;
}

/// Compares the analytic gradients of `net` (train phase, L1 loss) with
/// central differences taken on a double-precision copy of it. Parameter
/// entries are visited in random order until `opt.samples` are checked; an
/// entry whose probes flip a ReLU or change a max-pool winner straddles a
/// kink, where the central difference is not a derivative, and is skipped.
template <typename T>
GradCheckReport grad_check_network(Network<T>& net, const Tensor<double>& input, const Tensor<double>& label,
                                   const GradCheckOptions& opt) {
  net.zero_grad();
  const Tensor<T> out = net.forward(input.template cast<T>(), Phase::train);
  net.backward(l1_loss_grad(out, label.template cast<T>()));

  Network<double> probe = build_network<double>(net.config(), 0);
  probe.copy_state_from(net);
  probe.forward(input, Phase::train);
  const std::vector<std::size_t> base_pattern = probe.switch_pattern();
  bool same_region = true;
  const auto loss = [&] {
    const double l = l1_loss(probe.forward(input, Phase::train), label);
    if (!std::isfinite(l)) throw NumericError("non-finite loss during gradient check");
    same_region = same_region && probe.switch_pattern() == base_pattern;
    return l;
  };

  auto params = net.parameters();
  auto probe_params = probe.parameters();
  std::vector<std::size_t> ends;
  std::size_t total = 0;
  for (const auto& p : params) ends.push_back(total += p.value->size());

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(opt.seed);
  shuffle_in_place(order, rng);

  GradCheckReport report;
  report.tolerance = opt.tolerance;
  for (std::size_t flat : order) {
    if (report.entries.size() >= opt.samples) break;
    const std::size_t param = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), flat) - ends.begin());
    const std::size_t i = flat - (ends[param] - params[param].value->size());
    same_region = true;
    const double n = detail::central_difference(&probe_params[param].value->data()[i], opt.step, loss);
    if (!same_region) {
      ++report.skipped;
      continue;
    }
    const double a = static_cast<double>(params[param].grad->data()[i]);
    report.entries.push_back({params[param].name, i, a, n, 0.0});
  }
  double largest = 0.0;
  for (const auto& e : report.entries) largest = std::max(largest, std::abs(e.numeric));
  const double floor = std::max(opt.floor, opt.floor_fraction * largest);
  for (auto& e : report.entries) e.rel_error = relative_error(e.analytic, e.numeric, floor);
  net.zero_grad();
  return report;
}

/// 16x12 V2 network with stage widths of at most 4.
inline NetworkConfig tiny_cuenet_config() {
  NetworkConfig cfg;
  cfg.version = CueNetVersion::v2;
  cfg.height = 12;
  cfg.width = 16;
  cfg.widths = {2, 2, 4, 4, 4, 2, 2, 2, 2, 2, 2, 2, 2};
  return cfg;
}

/// 2-3-2 sigmoid net with quadratic loss, every parameter checked on
/// `draws` random (input, label) pairs.
inline GradCheckReport dense_suite(std::uint64_t seed, std::size_t draws = 3, double tolerance = 1e-6) {
  SplitMix64 rng(seed);
  auto net = DenseNet<double>::random({2, 3, 2}, Activation::sigmoid, rng);
  GradCheckOptions opt;
  opt.tolerance = tolerance;
  GradCheckReport report;
  report.tolerance = tolerance;
  for (std::size_t d = 0; d < draws; ++d) {
    Tensor<double> x({2}, {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    Tensor<double> y({2}, {rng.uniform(), rng.uniform()});
    report.merge(grad_check_dense(net, x, y, LossKind::quadratic, opt));
  }
  return report;
}

/// Tiny CueNet with L1 loss. The label is redrawn until every output pixel
/// differs from it by more than 1e-3 relative, keeping the loss differentiable
/// around the probe.
template <typename T>
GradCheckReport cuenet_suite(std::uint64_t seed, const GradCheckOptions& opt, bool corrupt_relu = false) {
  const NetworkConfig cfg = tiny_cuenet_config();
  Network<T> net = build_network<T>(cfg, seed);
  net.inject_relu_fault(corrupt_relu);
  SplitMix64 rng = SplitMix64::derive(seed, 0x4743);
  const Shape2D s = cfg.input_shape();
  Tensor<double> input(s.chw());
  for (auto& v : input) v = rng.uniform();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Point center{rng.uniform(0.0, static_cast<double>(s.width - 1)),
                       rng.uniform(0.0, static_cast<double>(s.height - 1))};
    const Tensor<double> label = data::gaussian_heatmap<double>(center, 1.5, s.height, s.width);
    const Tensor<double> out = net.forward(input.template cast<T>(), Phase::train).template cast<double>();
    if (l1_relative_margin(out, label) > 1e-3) return grad_check_network(net, input, label, opt);
  }
  throw NumericError("could not place a label away from the L1 kink");
}

}  // namespace cuenet::train
