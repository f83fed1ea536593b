// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Monte Carlo sweep harness: NMSE metric, the four sweep experiments (noise
// SNR, pilot-corruption SNR, angle mismatch, switching imperfection) and
// CSV/JSON emission.

#pragma once

#include "net.hpp"

namespace lischan {

enum class SweepKind { snr, pilot_snr, angle_mismatch, epsilon };

const char* sweep_kind_name(SweepKind k);
SweepKind sweep_kind_from_name(const std::string& s);

// One sweep experiment.  The swept knob comes from `grid`; everything else is
// pinned by the fixed_* fields.  fixed_snr_db is a list cycled over trials so
// a sweep can match the mixed-SNR distribution of a training set.  The
// angle_mismatch grid is in degrees.
struct SweepSpec {
  SweepKind kind = SweepKind::snr;
  std::vector<double> grid;
  int trials = 100;
  std::vector<double> fixed_snr_db = {10.0};
  double fixed_pilot_snr_db = kInfDb;
  double fixed_eps = 0.0;
  std::vector<std::string> estimators = {"ls"};
  std::uint64_t seed = 1;
  bool squared = false;  // squared-norm NMSE variant, off by default
  bool fresh_channel_per_trial = false;
  double snr_log_scale = 20.0;

  void validate() const;
  nlohmann::json to_json() const;
  static SweepSpec from_json(const nlohmann::json& j);
  static SweepSpec load(const std::string& path);
};

// Learned estimator bundle for the "channelnet" identifier.
struct TrainedNets {
  Network* net_direct = nullptr;
  Network* net_cascaded = nullptr;
  NormStats norm_direct;
  NormStats norm_cascaded;
};

struct SweepCell {
  double grid_value = 0.0;
  std::string estimator;
  std::vector<double> nmse_direct_user;    // per user
  std::vector<double> nmse_cascaded_user;  // per user
  double nmse_direct = 0.0;                // mean over users
  double nmse_cascaded = 0.0;
};

struct SweepResult {
  SweepSpec spec;
  ScenarioConfig scenario;
  std::vector<SweepCell> cells;  // grid-major, then estimator order
  double elapsed_seconds = 0.0;  // not serialized; manifests carry timing
};

// Mean over trials of ||truth - estimate||_F / ||truth||_F (ratio of squared
// norms when squared is set).  Throws data_error on empty trials or zero-norm
// truth.
double nmse(const Eigen::MatrixXcd& truth,
            const std::vector<Eigen::MatrixXcd>& estimates,
            bool squared = false);

// J trials per grid point; one shared channel realization per grid point with
// fresh noise unless fresh_channel_per_trial is set.  The angle_mismatch
// sweep scores estimates against the nominal channel while pilots propagate
// through the perturbed one.  Deterministic in (spec, scenario, seed) at any
// thread count.
SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& scenario,
                      const TrainedNets* nets = nullptr, int threads = 1);

// Writes <path_prefix>.csv and <path_prefix>.json.  Byte-identical for
// identical (spec, scenario, seed); no timestamps inside either file.
void emit(const SweepResult& result, const std::string& path_prefix);

SweepResult load_sweep_result(const std::string& json_path);

// FNV-1a over the canonical spec + scenario JSON, as a 16-digit hex string.
std::string config_hash(const SweepSpec& spec, const ScenarioConfig& scenario);

// "<sweep-kind>_<timestamp>_<confighash>" for CLI artifact naming.
std::string default_basename(const SweepSpec& spec,
                             const ScenarioConfig& scenario);

}  // namespace lischan
