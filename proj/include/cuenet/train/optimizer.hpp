// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "cuenet/error.hpp"
#include "cuenet/network.hpp"
#include "cuenet/tensor.hpp"

namespace cuenet::train {

enum class OptimizerKind { sgd, adam };

inline OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// p <- p - lr * g
template <typename T>
void sgd_step(Tensor<T>& param, const Tensor<T>& grad, double learning_rate) {
  Tensor<T>::require_same_dims(param, grad, "sgd_step");
  const T lr = static_cast<T>(learning_rate);
  for (std::size_t i = 0; i < param.size(); ++i) param.data()[i] -= lr * grad.data()[i];
}

template <typename T>
struct AdamState {
  Tensor<T> m;
  Tensor<T> v;
  explicit AdamState(const Dims& dims) : m(dims), v(dims) {}
};

/// Bias-corrected Adam update for step t >= 1.
template <typename T>
void adam_step(AdamState<T>& state, Tensor<T>& param, const Tensor<T>& grad, const AdamConfig& cfg, std::uint64_t t) {
  Tensor<T>::require_same_dims(param, grad, "adam_step");
  Tensor<T>::require_same_dims(param, state.m, "adam_step state");
  if (t == 0) throw ConfigError("adam_step counts steps from 1");
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  const T step = static_cast<T>(cfg.learning_rate / c1);
  const T inv_c2 = static_cast<T>(1.0 / c2);
  const T eps = static_cast<T>(cfg.epsilon);
  T* p = param.data();
  T* m = state.m.data();
  T* v = state.v.data();
  const T* g = grad.data();
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = b1 * m[i] + (T{1} - b1) * g[i];
    v[i] = b2 * v[i] + (T{1} - b2) * g[i] * g[i];
    p[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
  }
}

/// Applies SGD or Adam to a network's parameter list, owning the Adam moments.
template <typename T>
class Optimizer {
public:
  Optimizer(OptimizerKind kind, AdamConfig cfg) : kind_(kind), cfg_(cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning rate must be nonnegative");
    if (!(cfg.beta1 > 0.0 && cfg.beta1 < 1.0 && cfg.beta2 > 0.0 && cfg.beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in (0,1)");
    }
  }

  void step(const std::vector<ParamRef<T>>& params) {
    ++t_;
    if (kind_ == OptimizerKind::sgd) {
      for (const auto& p : params) sgd_step(*p.value, *p.grad, cfg_.learning_rate);
      return;
    }
    if (states_.empty()) {
      for (const auto& p : params) states_.emplace_back(p.value->dims());
    }
    if (states_.size() != params.size()) throw ShapeError("optimizer parameter list changed size");
    for (std::size_t i = 0; i < params.size(); ++i) adam_step(states_[i], *params[i].value, *params[i].grad, cfg_, t_);
  }

  std::uint64_t steps() const { return t_; }

private:
  OptimizerKind kind_;
  AdamConfig cfg_;
  std::vector<AdamState<T>> states_;
  std::uint64_t t_ = 0;
};

}  // namespace cuenet::train
