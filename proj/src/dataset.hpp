// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pilots.hpp"

namespace lischan {

enum class SampleKind { direct, cascaded };

// Real three-channel image: channel 0 = Re, 1 = Im, 2 = |.| of the received
// pilot signal.  Planes are column-major; index = c*h*w + col*h + row.
struct InputTensor {
  int h = 0, w = 0, c = 3;
  std::vector<float> data;
};

struct SampleMeta {
  int user = 0;
  int u = 0;  // label-noise copy index
  int v = 0;  // channel realization index
  double snr_db = 0.0;
  double label_snr_db = kInfDb;
};

struct Sample {
  InputTensor input;
  std::vector<float> label;
  SampleKind kind = SampleKind::direct;
  SampleMeta meta;
};

// Per-input-channel standardization statistics, computed on the training
// partition and stored with the dataset.
struct NormStats {
  std::array<double, 3> mean = {0, 0, 0};
  std::array<double, 3> stddev = {1, 1, 1};
};

struct GenParams {
  int U = 1;
  int V = 1;
  std::vector<double> train_snr_db = {kInfDb};
  std::vector<double> label_snr_db = {kInfDb};
  double train_fraction = 0.7;
  int approach = 1;  // phase-II received-signal variant used for inputs
  double snr_log_scale = 20.0;

  nlohmann::json to_json() const;
  static GenParams from_json(const nlohmann::json& j);
};

struct Dataset {
  SampleKind kind = SampleKind::direct;
  int in_h = 0, in_w = 0, in_c = 3;
  int label_len = 0;
  std::size_t train_count = 0;  // first train_count samples form the train split
  ScenarioConfig config;
  GenParams gen;
  NormStats norm;
  std::vector<Sample> samples;
};

// Per-entry complex Gaussian perturbation with variance solved from the
// per-entry label SNR definition snr = log_scale*log10(|x|^2/sigma^2).
Eigen::MatrixXcd noisy_label(const Eigen::MatrixXcd& entries, double snr_db,
                             Rng& rng, double log_scale = 20.0);

// Column-major refold of the phase-I received vector into sqrt(M) x sqrt(M)
// (rectangular fallback when M is not a perfect square).
InputTensor build_input_direct(const Eigen::RowVectorXcd& y_direct, int M);

// Stack the L per-element rows into an LM vector, refold column-major into
// L x M.
InputTensor build_input_cascaded(const std::vector<Eigen::RowVectorXcd>& y_cols);

// z_DC = [Re(h); Im(h)], z_CC = [Re(vec(G)); Im(vec(G))], column-major vec.
std::vector<float> build_label_direct(const Eigen::VectorXcd& h);
std::vector<float> build_label_cascaded(const Eigen::MatrixXcd& G);

// Inverses used at prediction time.
Eigen::VectorXcd label_to_direct(const std::vector<float>& z);
Eigen::MatrixXcd label_to_cascaded(const std::vector<float>& z, int M, int L);

// Training-data generation: V channel realizations x U label-noise copies x
// K users, replicated over the cartesian product of train and label SNRs.
// Samples are shuffled and normalization statistics frozen on the training
// partition before return.  Deterministic in config.seed.
std::pair<Dataset, Dataset> generate(const ScenarioConfig& config,
                                     const GenParams& gen, int threads = 1);

// Disjoint shuffled partition of sizes (floor(T*f), T - floor(T*f)).
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  Rng& rng);

NormStats compute_norm_stats(const Dataset& ds, std::size_t train_count);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// Normalized input / raw label matrices (column per sample) for a contiguous
// sample range, ready for the trainer.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_matrices(const Dataset& ds,
                                                        std::size_t begin,
                                                        std::size_t count);

Eigen::VectorXd normalize_input(const InputTensor& in, const NormStats& norm);

}  // namespace lischan
