// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/checkpoint.hpp"
#include "cuenet/data/augment.hpp"
#include "cuenet/data/sample.hpp"
#include "cuenet/error.hpp"
#include "cuenet/loss.hpp"
#include "cuenet/network.hpp"
#include "cuenet/random.hpp"
#include "cuenet/train/optimizer.hpp"

namespace cuenet::train {

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::adam;
  AdamConfig adam{};
  std::size_t batch_size = 1;
  std::size_t max_epochs = 20;
  /// Epochs without a new best validation loss before stopping.
  std::size_t patience = 3;
  std::uint64_t seed = 1;
  bool shuffle = true;
  bool augment = false;
  data::AugmentParams augment_params{};

  void validate() const {
    if (!(adam.learning_rate >= 0.0)) throw ConfigError("learning rate must be nonnegative");
    if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0 && adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in (0,1)");
    }
    if (batch_size == 0) throw ConfigError("batch size must be >= 1");
    if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
    if (augment) augment_params.validate();
  }
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
};

enum class StopReason { max_epochs, early_stop };

inline std::string to_string(StopReason r) { return r == StopReason::max_epochs ? "max_epochs" : "early_stop"; }

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;  // 1-based, 0 before any epoch
  StopReason stop_reason = StopReason::max_epochs;

  double best_val_loss() const {
    return best_epoch == 0 ? std::numeric_limits<double>::infinity() : epochs[best_epoch - 1].val_loss;
  }

  /// `epoch,train_loss,val_loss` rows.
  std::string to_csv() const {
    std::ostringstream os;
    os << "epoch,train_loss,val_loss\n" << std::setprecision(9);
    for (const auto& e : epochs) os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
    return os.str();
  }
};

/// Tracks the best validation loss and decides when to stop.
class EarlyStopper {
public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Records one epoch; returns true if it set a new best.
  bool record(double val_loss) {
    ++epoch_;
    if (val_loss < best_) {
      best_ = val_loss;
      best_epoch_ = epoch_;
      stale_ = 0;
      return true;
    }
    ++stale_;
    return false;
  }

  bool should_stop() const { return patience_ > 0 && stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }

private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

/// One pass over the training set: seeded shuffle, then per mini-batch
/// forward, L1 loss, backward, batch-averaged gradients and an optimizer
/// step. Returns the mean per-sample loss.
template <typename T>
double train_epoch(Network<T>& net, std::span<const data::Sample> train_set, const TrainConfig& cfg,
                   Optimizer<T>& optimizer, std::size_t epoch) {
  if (train_set.empty()) throw DataError(DataErrorKind::empty_dataset, "training set is empty");
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (cfg.shuffle) {
    SplitMix64 rng = SplitMix64::derive(cfg.seed, 0x5348554646ULL + epoch);
    shuffle_in_place(order, rng);
  }
  auto params = net.parameters();
  double total = 0.0;
  std::size_t in_batch = 0;
  net.zero_grad();
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const data::Sample* sample = &train_set[order[pos]];
    std::optional<data::Sample> augmented;
    if (cfg.augment) {
      const std::uint64_t seed = SplitMix64::derive(cfg.seed, (epoch << 32) ^ pos)();
      try {
        augmented = data::augment(*sample, cfg.augment_params, seed);
        sample = &*augmented;
      } catch (const DataError& e) {
        if (e.kind() != DataErrorKind::center_out_of_bounds) throw;
      }
    }
    try {
      const Tensor<T> input = sample->frames.template cast<T>();
      const Tensor<T> label = sample->label.template cast<T>();
      const Tensor<T> out = net.forward(input, Phase::train);
      const T loss = l1_loss(out, label);
      if (!std::isfinite(static_cast<double>(loss))) {
        throw NumericError("non-finite training loss at sample " + std::to_string(order[pos]));
      }
      total += static_cast<double>(loss);
      net.backward(l1_loss_grad(out, label));
    } catch (const ShapeError& e) {
      throw ShapeError("training sample " + std::to_string(order[pos]) + ": " + e.what());
    }
    if (++in_batch == cfg.batch_size || pos + 1 == order.size()) {
      if (in_batch > 1) net.scale_grads(static_cast<T>(1.0 / static_cast<double>(in_batch)));
      optimizer.step(params);
      net.zero_grad();
      in_batch = 0;
    }
  }
  return total / static_cast<double>(train_set.size());
}

/// Mean L1 loss with frozen parameters.
template <typename T>
double validate(Network<T>& net, std::span<const data::Sample> validation_set) {
  if (validation_set.empty()) throw DataError(DataErrorKind::empty_dataset, "validation set is empty");
  double total = 0.0;
  for (std::size_t i = 0; i < validation_set.size(); ++i) {
    try {
      const Tensor<T> out = net.forward(validation_set[i].frames.template cast<T>(), Phase::eval);
      total += static_cast<double>(l1_loss(out, validation_set[i].label.template cast<T>()));
    } catch (const ShapeError& e) {
      throw ShapeError("validation sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return total / static_cast<double>(validation_set.size());
}

struct FitResult {
  TrainHistory history;
  /// Serialized checkpoint of the epoch with the lowest validation loss.
  std::vector<std::uint8_t> best_checkpoint;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Alternates training and validation epochs until max_epochs or until the
/// validation loss has not improved for `patience` epochs. The network ends up
/// holding the best epoch's state.
template <typename T>
FitResult fit(Network<T>& net, std::span<const data::Sample> train_set, std::span<const data::Sample> validation_set,
              const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (train_set.empty() || validation_set.empty()) {
    throw DataError(DataErrorKind::empty_dataset, "fit needs nonempty training and validation sets");
  }
  Optimizer<T> optimizer(cfg.optimizer, cfg.adam);
  EarlyStopper stopper(cfg.patience);
  FitResult result;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_epoch(net, train_set, cfg, optimizer, epoch);
    rec.val_loss = validate(net, validation_set);
    result.history.epochs.push_back(rec);
    if (stopper.record(rec.val_loss)) result.best_checkpoint = serialize_checkpoint(net);
    if (on_epoch) on_epoch(rec);
    if (stopper.should_stop() && epoch < cfg.max_epochs) {
      result.history.stop_reason = StopReason::early_stop;
      break;
    }
  }
  result.history.best_epoch = stopper.best_epoch();
  if (!result.best_checkpoint.empty()) {
    Network<T> best = deserialize_checkpoint<T>(result.best_checkpoint, net.config());
    net.copy_state_from(best);
  }
  return result;
}

}  // namespace cuenet::train
