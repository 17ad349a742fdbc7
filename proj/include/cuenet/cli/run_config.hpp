// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/error.hpp"

namespace cuenet::cli {

struct KeySpec {
  std::string key;
  std::string default_value;
  std::string help;
};

/// Every accepted configuration key with its default.
inline const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"seed", "1", "seed for network init, shuffling, splitting and synthesis"},
      {"threads", "1", "worker threads for convolution"},
      {"out", ".", "output directory"},
      {"checkpoint", "", "checkpoint file to read (eval, track)"},

      {"network.version", "v2", "v1 (one frame) or v2 (three stacked frames)"},
      {"network.scale", "1", "stage width factor n/d, e.g. 1/4 for a quarter-width network"},
      {"network.eval_statistics", "per_sample", "batch-norm statistics in eval: per_sample or running"},

      {"data.path", "", "dataset directory"},
      {"data.sigma", "2", "label Gaussian sigma in pixels"},
      {"data.grid_rows", "4", "location split grid rows"},
      {"data.grid_cols", "4", "location split grid columns"},
      {"data.validation_cells", "4", "grid cells assigned to validation"},
      {"data.subset", "all", "eval/track subset: all, train or validation"},

      {"augment.enabled", "false", "random rotation, brightness and contrast during training"},
      {"augment.max_rotation_deg", "5", "rotation range +-degrees"},
      {"augment.max_brightness", "0.15", "brightness offset range +-"},
      {"augment.contrast_min", "0.8", "lowest contrast factor"},
      {"augment.contrast_max", "1.25", "highest contrast factor"},

      {"train.optimizer", "adam", "adam or sgd"},
      {"train.learning_rate", "1e-4", "step size"},
      {"train.beta1", "0.9", "Adam first-moment decay"},
      {"train.beta2", "0.999", "Adam second-moment decay"},
      {"train.epsilon", "1e-8", "Adam denominator epsilon"},
      {"train.batch_size", "1", "samples per optimizer step"},
      {"train.max_epochs", "20", "epoch limit"},
      {"train.patience", "3", "epochs without validation improvement before stopping"},

      {"eval.tolerance", "auto", "PE tolerance in pixels; auto = 4 scaled by width/240, at least 2"},
      {"track.k", "1", "peaks per frame"},
      {"track.separation", "6", "minimum peak separation in pixels"},

      {"synth.width", "240", "frame width"},
      {"synth.height", "180", "frame height"},
      {"synth.frames", "500", "sequence length"},
      {"synth.ball_radius", "4", "ball radius in pixels"},
      {"synth.min_speed", "1", "lowest ball speed, px/frame"},
      {"synth.max_speed", "4", "highest ball speed, px/frame"},
      {"synth.turn_probability", "0.05", "per-frame chance of a new random velocity"},
      {"synth.layout_seed", "1", "board layout seed"},
      {"synth.occluder_probability", "0", "per-frame chance of spawning an occluder"},
      {"synth.shadow", "false", "sweeping shadow"},
      {"synth.shadow_period", "240", "frames per shadow sweep"},
      {"synth.shadow_depth", "0.65", "brightness factor inside the shadow"},
      {"synth.noise", "0.02", "Gaussian pixel noise sigma"},
      {"synth.two_balls", "false", "render a second ball"},
      {"synth.min_ball_separation", "10", "minimum starting distance of two balls"},
  };
  return keys;
}

/// Flat key=value configuration: defaults, then a config file, then flags.
class RunConfig {
public:
  RunConfig() {
    for (const auto& k : known_keys()) values_[k.key] = k.default_value;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second = value;
  }

  /// Applies `key=value` lines; `#` starts a comment.
  void apply_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
      }
      try {
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  /// Parses a `key=value` override.
  void apply_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  const std::string& str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }

  double real(const std::string& key) const {
    const std::string& v = str(key);
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("config key " + key + " expects a number, got '" + v + "'");
  }

  std::uint64_t integer(const std::string& key) const {
    const std::string& v = str(key);
    if (!v.empty() && v.find_first_not_of("0123456789") == std::string::npos) {
      try {
        return std::stoull(v);
      } catch (const std::exception&) {
      }
    }
    throw ConfigError("config key " + key + " expects a nonnegative integer, got '" + v + "'");
  }

  bool boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " expects true or false, got '" + v + "'");
  }

  const std::map<std::string, std::string>& values() const { return values_; }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << '=' << v << '\n';
    return os.str();
  }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace cuenet::cli
