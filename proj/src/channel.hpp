// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"
#include "scenario.hpp"

namespace lischan {

using cplx = std::complex<double>;

// Gains and angles of one Saleh-Valenzuela channel.  For the BS-LIS channel
// `angles` holds the departure angles at the BS and `angles_lis` the arrival
// angles at the LIS; for the user channels `angles_lis` is empty.
struct PathParams {
  std::vector<cplx> gains;
  std::vector<double> angles;
  std::vector<double> angles_lis;
};

struct ChannelPaths {
  std::vector<PathParams> direct;    // per user
  std::vector<PathParams> lis_user;  // per user
  PathParams bs_lis;
};

// One draw of all channel quantities for every user.
struct ChannelRealization {
  std::vector<Eigen::VectorXcd> h_direct;    // h_D,k, M x 1
  std::vector<Eigen::VectorXcd> h_lis_user;  // h_A,k, L x 1
  Eigen::MatrixXcd H_bs_lis;                 // M x L
  std::vector<Eigen::MatrixXcd> G_cascaded;  // G_k = H diag(h_A,k), M x L
  ChannelPaths paths;
};

// Per-element amplitude/phase state of the surface, with switching
// imperfection parameters.  An element marked ON has beta = 1 - eps_on, an
// element marked OFF has beta = eps_off.
struct LisState {
  Eigen::VectorXd beta;  // in [0, 1]
  Eigen::VectorXd phi;   // in [0, 2*pi)
  double eps_on = 0.0;
  double eps_off = 0.0;
};

// Half-wavelength ULA response; entry n is exp(j*n*pi*sin(theta))/sqrt(n_elements).
Eigen::VectorXcd steering_vector(int n_elements, double theta);

ChannelPaths draw_paths(const ScenarioConfig& config, Rng& rng);
ChannelRealization assemble_channels(const ScenarioConfig& config,
                                     const ChannelPaths& paths);
ChannelRealization draw_channels(const ScenarioConfig& config, Rng& rng);

// Independent zero-mean Gaussian perturbation of std sigma_theta on every
// user-path AOA (direct and LIS-user); gains and the BS-LIS channel untouched.
ChannelPaths perturb_angles(const ChannelPaths& paths, double sigma_theta,
                            Rng& rng);

LisState lis_all_off(int n_elements, double eps_off = 0.0, double eps_on = 0.0);
LisState lis_all_on(int n_elements, double eps_on = 0.0, double eps_off = 0.0);
// Element l ON with phi_l = 0, all others OFF.  Throws std::out_of_range.
LisState lis_single_on(int n_elements, int l, double eps_on = 0.0,
                       double eps_off = 0.0);

// psi_l = beta_l * exp(j*phi_l)
Eigen::VectorXcd reflect_vector(const LisState& state);

}  // namespace lischan
