// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Batch-job orchestration shared by the C API and the CLI.  Each job reads
// one JSON config, writes its artifacts under an output directory and drops a
// manifest next to them.  Config schemas are documented in docs/formats.md.

#pragma once

#include <optional>

#include "eval.hpp"

namespace lischan {

constexpr const char* kToolVersion = "1.0.0";

struct GenerateOutcome {
  std::string direct_path;
  std::string cascaded_path;
  std::string manifest_path;
  std::size_t samples_per_set = 0;
};

// Config: {"scenario": {...}, "gen": {...}}.  Writes direct.ds, cascaded.ds.
GenerateOutcome run_generate(const std::string& config_path,
                             const std::string& out_dir,
                             std::optional<std::uint64_t> seed_override,
                             int threads);

struct TrainOutcome {
  std::string checkpoint_path;
  std::string log_path;
  std::string manifest_path;
  int epochs = 0;
  int best_epoch = 0;
  double best_val_mse = 0.0;
  double best_val_nmse = 0.0;
};

// Config: {"dataset": path, "train": {...}, "arch": {...} (optional)}.
// Relative paths resolve against the config file's directory.  Writes
// <kind>.ckpt and <kind>_log.csv.
TrainOutcome run_train(const std::string& config_path,
                       const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override);

struct SweepOutcome {
  std::string csv_path;
  std::string json_path;
  std::string manifest_path;
};

// Config: {"sweep": {...}, "scenario": {...}, "checkpoints": {"direct": path,
// "cascaded": path} (required iff "channelnet" is listed), "output_basename":
// string (optional, defaults to <kind>_<timestamp>_<confighash>)}.
SweepOutcome run_sweep_job(const std::string& config_path,
                           const std::string& out_dir,
                           std::optional<std::uint64_t> seed_override,
                           int threads);

}  // namespace lischan
