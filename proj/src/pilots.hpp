// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <limits>

#include "channel.hpp"

namespace lischan {

constexpr double kInfDb = std::numeric_limits<double>::infinity();

// Orthogonal pilot matrices.  X holds unit-modulus DFT rows (X X^H = P I_M);
// X_bar is the ML x ML analogue used by the joint phase-II estimator.
struct PilotMatrix {
  Eigen::MatrixXcd X;      // M x P
  Eigen::MatrixXcd X_bar;  // ML x ML
  double symbol_power = 1.0;
};

PilotMatrix make_pilots(int M, int P, int L);  // throws config_error if P < M

// Phase-I reception for all users: row k of the result is
// (h_D,k + G_k psi)^H X + n with n i.i.d. CN(0, noise_var).
Eigen::MatrixXcd phase1_receive(const ChannelRealization& ch,
                                const LisState& lis, const PilotMatrix& pilots,
                                double noise_var, Rng& rng);

// Phase-II per-element reception, element l ON, all others OFF.
Eigen::MatrixXcd phase2_element_receive(const ChannelRealization& ch, int l,
                                        const PilotMatrix& pilots,
                                        double noise_var, double eps_on,
                                        double eps_off, Rng& rng);

// Phase-II joint reception, all elements ON: row k is
// (1_L (x) h_D,k + (1 - eps_on) gbar_k)^H X_bar + nbar, length ML.
Eigen::MatrixXcd phase2_joint_receive(const ChannelRealization& ch,
                                      const PilotMatrix& pilots,
                                      double noise_var, double eps_on,
                                      Rng& rng);

// Additive CN(0, sigma_x^2) on every entry of X and X_bar, with sigma_x^2
// solved from snr_x_db = log_scale * log10(|x|^2 / sigma_x^2) at unit entry
// power.  +inf means no corruption.  The clean matrix stays with the caller
// for receiver-side use.
PilotMatrix corrupt_pilots(const PilotMatrix& pilots, double snr_x_db, Rng& rng,
                           double log_scale = 20.0);

// sigma^2 for a dB value under the stated log convention (+inf -> 0).
inline double variance_from_snr_db(double snr_db, double log_scale) {
  if (snr_db == kInfDb) return 0.0;
  return std::pow(10.0, -snr_db / log_scale);
}

// Received SNR convention: snr_db = 10 log10(symbol_power / sigma_n^2).
inline double noise_power_from_snr_db(double snr_db, double symbol_power = 1.0) {
  if (snr_db == kInfDb) return 0.0;
  return symbol_power * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace lischan
