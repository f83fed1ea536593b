// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "channel.hpp"

#include <stdexcept>

namespace lischan {

Eigen::VectorXcd steering_vector(int n_elements, double theta) {
  Eigen::VectorXcd a(n_elements);
  const double w = M_PI * std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_elements));
  for (int n = 0; n < n_elements; ++n)
    a(n) = scale * cplx(std::cos(n * w), std::sin(n * w));
  return a;
}

namespace {

// Gains CN(0,1) i.i.d., angles uniform on the configured interval.  Draw
// order is fixed (gain then angle, path by path) so a seed pins the output.
PathParams draw_single(int n_paths, double lo, double hi, bool with_lis_angle,
                       Rng& rng) {
  PathParams p;
  p.gains.reserve(n_paths);
  p.angles.reserve(n_paths);
  for (int n = 0; n < n_paths; ++n) {
    p.gains.push_back(rng.cgaussian(1.0));
    p.angles.push_back(rng.uniform(lo, hi));
    if (with_lis_angle) p.angles_lis.push_back(rng.uniform(lo, hi));
  }
  return p;
}

Eigen::VectorXcd sv_channel(int n_elements, double scale, const PathParams& p) {
  Eigen::VectorXcd h = Eigen::VectorXcd::Zero(n_elements);
  for (std::size_t n = 0; n < p.gains.size(); ++n)
    h += p.gains[n] * steering_vector(n_elements, p.angles[n]);
  return scale * h;
}

}  // namespace

ChannelPaths draw_paths(const ScenarioConfig& c, Rng& rng) {
  const double lo = c.angle_range[0], hi = c.angle_range[1];
  ChannelPaths paths;
  paths.direct.reserve(c.K);
  paths.lis_user.reserve(c.K);
  for (int k = 0; k < c.K; ++k)
    paths.direct.push_back(draw_single(c.N_D, lo, hi, false, rng));
  for (int k = 0; k < c.K; ++k)
    paths.lis_user.push_back(draw_single(c.N_A, lo, hi, false, rng));
  paths.bs_lis = draw_single(c.N_H, lo, hi, true, rng);
  return paths;
}

ChannelRealization assemble_channels(const ScenarioConfig& c,
                                     const ChannelPaths& paths) {
  ChannelRealization ch;
  ch.paths = paths;

  const double sd = std::sqrt(static_cast<double>(c.M) / c.N_D);
  const double sa = std::sqrt(static_cast<double>(c.L) / c.N_A);
  for (int k = 0; k < c.K; ++k) {
    ch.h_direct.push_back(sv_channel(c.M, sd, paths.direct[k]));
    ch.h_lis_user.push_back(sv_channel(c.L, sa, paths.lis_user[k]));
  }

  const double sh = std::sqrt(static_cast<double>(c.M) * c.L / c.N_H);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(c.M, c.L);
  for (std::size_t n = 0; n < paths.bs_lis.gains.size(); ++n) {
    H += paths.bs_lis.gains[n] *
         steering_vector(c.M, paths.bs_lis.angles[n]) *
         steering_vector(c.L, paths.bs_lis.angles_lis[n]).adjoint();
  }
  ch.H_bs_lis = sh * H;

  for (int k = 0; k < c.K; ++k)
    ch.G_cascaded.push_back(ch.H_bs_lis * ch.h_lis_user[k].asDiagonal());
  return ch;
}

ChannelRealization draw_channels(const ScenarioConfig& c, Rng& rng) {
  return assemble_channels(c, draw_paths(c, rng));
}

ChannelPaths perturb_angles(const ChannelPaths& paths, double sigma_theta,
                            Rng& rng) {
  if (sigma_theta < 0.0)
    throw std::invalid_argument("perturb_angles: sigma_theta must be >= 0");
  ChannelPaths out = paths;
  for (auto& p : out.direct)
    for (auto& a : p.angles) a += sigma_theta * rng.gaussian();
  for (auto& p : out.lis_user)
    for (auto& a : p.angles) a += sigma_theta * rng.gaussian();
  return out;
}

LisState lis_all_off(int n_elements, double eps_off, double eps_on) {
  LisState s;
  s.beta = Eigen::VectorXd::Constant(n_elements, eps_off);
  s.phi = Eigen::VectorXd::Zero(n_elements);
  s.eps_on = eps_on;
  s.eps_off = eps_off;
  return s;
}

LisState lis_all_on(int n_elements, double eps_on, double eps_off) {
  LisState s;
  s.beta = Eigen::VectorXd::Constant(n_elements, 1.0 - eps_on);
  s.phi = Eigen::VectorXd::Zero(n_elements);
  s.eps_on = eps_on;
  s.eps_off = eps_off;
  return s;
}

LisState lis_single_on(int n_elements, int l, double eps_on, double eps_off) {
  if (l < 0 || l >= n_elements)
    throw std::out_of_range("lis_single_on: element index out of range");
  LisState s = lis_all_off(n_elements, eps_off, eps_on);
  s.beta(l) = 1.0 - eps_on;
  return s;
}

Eigen::VectorXcd reflect_vector(const LisState& state) {
  const Eigen::Index n = state.beta.size();
  Eigen::VectorXcd psi(n);
  for (Eigen::Index l = 0; l < n; ++l)
    psi(l) = state.beta(l) * cplx(std::cos(state.phi(l)), std::sin(state.phi(l)));
  return psi;
}

}  // namespace lischan
