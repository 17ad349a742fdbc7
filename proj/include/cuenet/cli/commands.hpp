// Copyright 2026 The CueNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cuenet/checkpoint.hpp"
#include "cuenet/cli/run_config.hpp"
#include "cuenet/data/augment.hpp"
#include "cuenet/data/dataset.hpp"
#include "cuenet/data/frames.hpp"
#include "cuenet/data/pgm.hpp"
#include "cuenet/data/split.hpp"
#include "cuenet/data/synth.hpp"
#include "cuenet/error.hpp"
#include "cuenet/metrics.hpp"
#include "cuenet/network.hpp"
#include "cuenet/parallel.hpp"
#include "cuenet/train/gradcheck.hpp"
#include "cuenet/train/trainer.hpp"

namespace cuenet::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

inline std::vector<std::size_t> scaled_widths(const Scale& scale) {
  auto w = default_widths();
  for (auto& v : w) v = scale.apply(v);
  return w;
}

inline NetworkConfig network_config(const RunConfig& rc, std::size_t height, std::size_t width) {
  NetworkConfig cfg;
  cfg.version = parse_version(rc.str("network.version"));
  cfg.height = height;
  cfg.width = width;
  cfg.widths = scaled_widths(Scale::parse(rc.str("network.scale")));
  const std::string& stats = rc.str("network.eval_statistics");
  if (stats == "per_sample") {
    cfg.eval_statistics = NormStatistics::per_sample;
  } else if (stats == "running") {
    cfg.eval_statistics = NormStatistics::running;
  } else {
    throw ConfigError("network.eval_statistics must be per_sample or running");
  }
  cfg.validate();
  return cfg;
}

inline data::AugmentParams augment_params(const RunConfig& rc) {
  data::AugmentParams p;
  p.max_rotation_deg = rc.real("augment.max_rotation_deg");
  p.max_brightness = rc.real("augment.max_brightness");
  p.contrast_min = rc.real("augment.contrast_min");
  p.contrast_max = rc.real("augment.contrast_max");
  p.label_sigma = rc.real("data.sigma");
  p.validate();
  return p;
}

inline train::TrainConfig train_config(const RunConfig& rc) {
  train::TrainConfig t;
  t.optimizer = train::parse_optimizer(rc.str("train.optimizer"));
  t.adam.learning_rate = rc.real("train.learning_rate");
  t.adam.beta1 = rc.real("train.beta1");
  t.adam.beta2 = rc.real("train.beta2");
  t.adam.epsilon = rc.real("train.epsilon");
  t.batch_size = rc.integer("train.batch_size");
  t.max_epochs = rc.integer("train.max_epochs");
  t.patience = rc.integer("train.patience");
  t.seed = rc.integer("seed");
  t.augment = rc.boolean("augment.enabled");
  if (t.augment) t.augment_params = augment_params(rc);
  t.validate();
  return t;
}

inline data::SynthConfig synth_config(const RunConfig& rc) {
  data::SynthConfig s;
  s.width = rc.integer("synth.width");
  s.height = rc.integer("synth.height");
  s.length = rc.integer("synth.frames");
  s.ball_radius = rc.real("synth.ball_radius");
  s.min_speed = rc.real("synth.min_speed");
  s.max_speed = rc.real("synth.max_speed");
  s.turn_probability = rc.real("synth.turn_probability");
  s.layout_seed = rc.integer("synth.layout_seed");
  s.seed = rc.integer("seed");
  s.occluder_probability = rc.real("synth.occluder_probability");
  s.shadow = rc.boolean("synth.shadow");
  s.shadow_period = rc.real("synth.shadow_period");
  s.shadow_depth = rc.real("synth.shadow_depth");
  s.noise = rc.real("synth.noise");
  s.two_balls = rc.boolean("synth.two_balls");
  s.min_ball_separation = rc.real("synth.min_ball_separation");
  s.label_sigma = rc.real("data.sigma");
  s.validate();
  return s;
}

inline data::RegionGrid region_grid(const RunConfig& rc) {
  return {rc.integer("data.grid_rows"), rc.integer("data.grid_cols")};
}

inline fs::path require_path(const RunConfig& rc, const std::string& key, const std::string& flag) {
  const std::string& p = rc.str(key);
  if (p.empty()) throw ConfigError("missing " + flag);
  return p;
}

inline data::DataSplit split_dataset(const RunConfig& rc, std::span<const data::Sample> samples) {
  return data::location_split(samples, region_grid(rc), rc.integer("data.validation_cells"), rc.integer("seed"));
}

/// Loads the dataset and turns it into network inputs for `version`.
inline std::vector<data::Sample> load_inputs(const RunConfig& rc, CueNetVersion version, data::DatasetMeta* meta) {
  auto ds = data::load_dataset(require_path(rc, "data.path", "--data"), rc.real("data.sigma"));
  if (ds.samples.empty()) throw DataError(DataErrorKind::empty_dataset, "dataset has no labeled frames");
  if (meta) *meta = ds.meta;
  return data::prepare_inputs(ds.samples, version);
}

/// Restricts inputs to the train or validation side of the location split.
inline std::vector<data::Sample> select_subset(const RunConfig& rc, std::vector<data::Sample> inputs) {
  const std::string& subset = rc.str("data.subset");
  if (subset == "all") return inputs;
  if (subset != "train" && subset != "validation") throw ConfigError("data.subset must be all, train or validation");
  auto split = split_dataset(rc, inputs);
  return subset == "train" ? std::move(split.train) : std::move(split.validation);
}

/// eval.tolerance, with `auto` resolving to the full-scale 4 px scaled to the
/// network's input width.
inline double tolerance_for(const RunConfig& rc, const NetworkConfig& cfg) {
  if (rc.str("eval.tolerance") == "auto") return scaled_tolerance(cfg.resolution_ratio());
  return rc.real("eval.tolerance");
}

inline fs::path output_dir(const RunConfig& rc) {
  fs::path dir = rc.str("out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError(DataErrorKind::io, "cannot create output directory " + dir.string());
  return dir;
}

inline int cmd_synth(const RunConfig& rc, std::ostream& out) {
  const data::SynthConfig sc = synth_config(rc);
  const auto frames = data::synth_sequence(sc);
  const fs::path dir = output_dir(rc);
  data::write_dataset(dir, frames);
  double path_length = 0.0;
  for (std::size_t i = 1; i < frames.size(); ++i) path_length += positioning_error(frames[i].center, frames[i - 1].center);
  out << "wrote " << frames.size() << " frames (" << sc.width << "x" << sc.height << ") to " << dir.string() << "\n";
  out << "mean ball speed " << std::fixed << std::setprecision(3)
      << (frames.size() > 1 ? path_length / static_cast<double>(frames.size() - 1) : 0.0) << " px/frame"
      << (sc.two_balls ? ", two balls" : "") << "\n";
  return kExitOk;
}

inline int cmd_train(const RunConfig& rc, std::ostream& out) {
  const CueNetVersion version = parse_version(rc.str("network.version"));
  data::DatasetMeta meta;
  const auto inputs = load_inputs(rc, version, &meta);
  const NetworkConfig ncfg = network_config(rc, meta.height, meta.width);
  const train::TrainConfig tcfg = train_config(rc);
  const auto split = split_dataset(rc, inputs);
  out << "train " << split.train.size() << " / validation " << split.validation.size() << " samples, "
      << to_string(version) << " with " << build_network<float>(ncfg, 0).parameter_count() << " parameters\n";

  Network<float> net = build_network<float>(ncfg, rc.integer("seed"));
  const auto result = train::fit(net, split.train, split.validation, tcfg, [&](const train::EpochRecord& e) {
    out << "epoch " << e.epoch << " train_loss " << std::setprecision(6) << e.train_loss << " val_loss "
        << e.val_loss << "\n";
    out.flush();
  });
  const fs::path dir = output_dir(rc);
  data::write_text_file(dir / "history.csv", result.history.to_csv());
  {
    std::ofstream f(dir / "checkpoint.cue", std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(result.best_checkpoint.data()),
            static_cast<std::streamsize>(result.best_checkpoint.size()));
    if (!f) throw DataError(DataErrorKind::io, "failed writing checkpoint");
  }
  out << "best val_loss " << std::setprecision(9) << result.history.best_val_loss() << " at epoch "
      << result.history.best_epoch << " (stop: " << train::to_string(result.history.stop_reason) << ")\n";
  return kExitOk;
}

inline Network<float> load_for_dataset(const RunConfig& rc) {
  return load_checkpoint<float>(require_path(rc, "checkpoint", "--checkpoint"));
}

inline void require_compatible(const Network<float>& net, const data::Sample& sample) {
  const Shape2D s = net.config().input_shape();
  if (sample.frames.dims() != s.chw()) {
    throw CheckpointError(CheckpointErrorKind::config_incompatible,
                          "checkpoint expects inputs " + dims_to_string(s.chw()) + " but the dataset yields " +
                              dims_to_string(sample.frames.dims()));
  }
}

inline int cmd_eval(const RunConfig& rc, std::ostream& out) {
  Network<float> net = load_for_dataset(rc);
  const auto inputs = select_subset(rc, load_inputs(rc, net.config().version, nullptr));
  if (inputs.empty()) throw DataError(DataErrorKind::empty_dataset, "selected subset is empty");
  require_compatible(net, inputs.front());
  const PEReport report = evaluate(net, inputs, tolerance_for(rc, net.config()));
  const double loss = train::validate(net, inputs);
  const fs::path dir = output_dir(rc);
  data::write_text_file(dir / "pe.csv", report.to_csv());
  data::write_text_file(dir / "summary.csv", report.summary());
  data::write_text_file(dir / "histogram.txt", report.histogram_plot());
  out << report.summary();
  out << "tolerance " << report.tolerance << " accuracy " << std::setprecision(6) << report.accuracy()
      << " mean_l1_loss " << std::setprecision(9) << loss << "\n";
  return kExitOk;
}

inline int cmd_track(const RunConfig& rc, bool dump_heatmaps, std::ostream& out) {
  Network<float> net = load_for_dataset(rc);
  const auto inputs = select_subset(rc, load_inputs(rc, net.config().version, nullptr));
  if (inputs.empty()) throw DataError(DataErrorKind::empty_dataset, "selected subset is empty");
  require_compatible(net, inputs.front());
  const std::size_t k = rc.integer("track.k");
  const double separation = rc.real("track.separation");
  const double tolerance = tolerance_for(rc, net.config());
  const fs::path dir = output_dir(rc);
  if (dump_heatmaps) fs::create_directories(dir / "heatmaps");

  std::ostringstream csv;
  csv << "frame_index,rank,x,y,probability\n" << std::setprecision(9);
  double worst_sum = 0.0;
  std::size_t recovered = 0;
  for (const auto& s : inputs) {
    const Tensor<float> heat = net.forward(s.frames, Phase::eval);
    const PeakSet peaks = top_k_peaks(heat, k, separation);
    for (std::size_t r = 0; r < peaks.size(); ++r) {
      csv << s.frame_index << ',' << r + 1 << ',' << peaks[r].x << ',' << peaks[r].y << ',' << peaks[r].probability
          << '\n';
    }
    std::vector<Point> truths{s.center};
    if (s.second_center) truths.push_back(*s.second_center);
    if (all_recovered(peaks, std::span<const Point>(truths).first(std::min(truths.size(), k)), tolerance)) ++recovered;
    double total = 0.0;
    for (float v : heat) total += v;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    if (dump_heatmaps) {
      const float peak = *std::max_element(heat.begin(), heat.end());
      Tensor<float> scaled = heat;
      if (peak > 0.0f) scaled *= 1.0f / peak;
      data::write_pgm(dir / "heatmaps" / data::frame_filename(s.frame_index), data::tensor_to_image(scaled));
    }
  }
  data::write_text_file(dir / "tracks.csv", csv.str());
  out << "tracked " << inputs.size() << " frames, k=" << k << "; all objects within " << tolerance << " px on "
      << recovered << " frames (" << std::setprecision(4)
      << static_cast<double>(recovered) / static_cast<double>(inputs.size()) << ")\n";
  out << "heatmap sums deviate from 1 by at most " << std::scientific << std::setprecision(2) << worst_sum
      << std::defaultfloat << "\n";
  return kExitOk;
}

inline int cmd_gradcheck(const RunConfig& rc, bool corrupt_relu, bool single_precision, std::ostream& out,
                         std::ostream& err) {
  const std::uint64_t seed = rc.integer("seed");
  const auto dense = train::dense_suite(seed);
  out << "dense 2-3-2 sigmoid, quadratic loss: " << dense.summary() << "\n";

  train::GradCheckOptions opt;
  opt.seed = seed;
  opt.samples = 60;
  train::GradCheckReport conv;
  if (single_precision) {
    opt.tolerance = 1e-3;
    opt.floor_fraction = 1e-2;
    err << "warning: --precision f32 loosens the CueNet tolerance to 1e-3 and compares gradients below 1% of the "
           "largest one on an absolute scale\n";
    conv = train::cuenet_suite<float>(seed, opt, corrupt_relu);
  } else {
    conv = train::cuenet_suite<double>(seed, opt, corrupt_relu);
  }
  out << "tiny CueNet 16x12, L1 loss" << (single_precision ? " (f32)" : "") << ": " << conv.summary() << "\n";
  return dense.passed() && conv.passed() ? kExitOk : kExitNumeric;
}

/// Parses argv and dispatches to a subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"CueNet ball tracking: synthesize data, train, evaluate and track"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads (1 keeps results bit-reproducible)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", overrides, "override a config key, key=value");

  std::optional<std::size_t> frames;
  bool two_balls = false;
  std::optional<std::string> version, checkpoint, data_dir, subset;
  std::optional<double> tolerance, separation;
  std::optional<std::size_t> k;
  bool dump_heatmaps = false;
  std::string corrupt;
  std::string precision = "f64";

  auto* synth = app.add_subcommand("synth", "render a synthetic labyrinth sequence");
  synth->add_option("--frames", frames, "sequence length");
  synth->add_flag("--two-balls", two_balls, "render a second ball");

  auto* train_cmd = app.add_subcommand("train", "train on a dataset directory");
  train_cmd->add_option("--data", data_dir, "dataset directory");
  train_cmd->add_option("--version", version, "v1 or v2");

  auto* eval = app.add_subcommand("eval", "positioning-error report for a checkpoint");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file");
  eval->add_option("--data", data_dir, "dataset directory");
  eval->add_option("--tolerance", tolerance, "PE tolerance in pixels");
  eval->add_option("--subset", subset, "all, train or validation");

  auto* track = app.add_subcommand("track", "per-frame heatmap peaks");
  track->add_option("--checkpoint", checkpoint, "checkpoint file");
  track->add_option("--data", data_dir, "dataset directory");
  track->add_option("--k", k, "peaks per frame");
  track->add_option("--separation", separation, "minimum peak separation in pixels");
  track->add_option("--tolerance", tolerance, "recovery tolerance in pixels");
  track->add_option("--subset", subset, "all, train or validation");
  track->add_flag("--dump-heatmaps", dump_heatmaps, "write heatmaps as PGM");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gradcheck->add_option("--corrupt", corrupt, "fault injection hook")->check(CLI::IsMember({"relu"}));
  gradcheck->add_option("--precision", precision, "f64 or f32")->check(CLI::IsMember({"f64", "f32"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig rc;
    if (!config_path.empty()) rc.apply_text(data::read_text_file(config_path, DataErrorKind::io));
    for (const auto& o : overrides) rc.apply_assignment(o);
    if (seed) rc.set("seed", std::to_string(*seed));
    if (threads) rc.set("threads", std::to_string(*threads));
    if (out_dir) rc.set("out", *out_dir);
    if (frames) rc.set("synth.frames", std::to_string(*frames));
    if (two_balls) rc.set("synth.two_balls", "true");
    if (version) rc.set("network.version", *version);
    if (checkpoint) rc.set("checkpoint", *checkpoint);
    if (data_dir) rc.set("data.path", *data_dir);
    if (subset) rc.set("data.subset", *subset);
    if (tolerance) {
      std::ostringstream os;
      os << std::setprecision(17) << *tolerance;
      rc.set("eval.tolerance", os.str());
    }
    if (k) rc.set("track.k", std::to_string(*k));
    if (separation) {
      std::ostringstream os;
      os << std::setprecision(17) << *separation;
      rc.set("track.separation", os.str());
    }
    const std::uint64_t n_threads = rc.integer("threads");
    if (n_threads == 0) throw ConfigError("threads must be >= 1");
    set_worker_threads(n_threads);

    if (synth->parsed()) return cmd_synth(rc, out);
    if (train_cmd->parsed()) return cmd_train(rc, out);
    if (eval->parsed()) return cmd_eval(rc, out);
    if (track->parsed()) return cmd_track(rc, dump_heatmaps, out);
    return cmd_gradcheck(rc, corrupt == "relu", precision == "f32", out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace cuenet::cli
