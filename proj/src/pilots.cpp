// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "pilots.hpp"

#include "errors.hpp"

namespace lischan {

namespace {

Eigen::MatrixXcd dft_rows(int rows, int cols) {
  Eigen::MatrixXcd X(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const double a = -2.0 * M_PI * r * c / cols;
      X(r, c) = cplx(std::cos(a), std::sin(a));
    }
  return X;
}

// y_k = c_k^H S + n_k for every user, one noise draw per (user, symbol).
Eigen::MatrixXcd receive(const std::vector<Eigen::VectorXcd>& eff,
                         const Eigen::MatrixXcd& S, double noise_var,
                         Rng& rng) {
  const Eigen::Index K = static_cast<Eigen::Index>(eff.size());
  const Eigen::Index P = S.cols();
  Eigen::MatrixXcd Y(K, P);
  for (Eigen::Index k = 0; k < K; ++k) {
    Y.row(k) = eff[k].adjoint() * S;
    if (noise_var > 0.0)
      for (Eigen::Index p = 0; p < P; ++p) Y(k, p) += rng.cgaussian(noise_var);
  }
  return Y;
}

}  // namespace

PilotMatrix make_pilots(int M, int P, int L) {
  if (M < 1 || P < 1 || L < 1)
    throw config_error("make_pilots: dimensions must be >= 1");
  if (P < M) throw config_error("make_pilots: P >= M required");
  PilotMatrix pm;
  pm.X = dft_rows(M, P);
  pm.X_bar = dft_rows(M * L, M * L);
  pm.symbol_power = 1.0;
  return pm;
}

Eigen::MatrixXcd phase1_receive(const ChannelRealization& ch,
                                const LisState& lis, const PilotMatrix& pilots,
                                double noise_var, Rng& rng) {
  const auto K = ch.h_direct.size();
  if (pilots.X.rows() != ch.h_direct[0].size())
    throw data_error("phase1_receive: pilot/channel dimension mismatch");
  const Eigen::VectorXcd psi = reflect_vector(lis);
  std::vector<Eigen::VectorXcd> eff(K);
  for (std::size_t k = 0; k < K; ++k)
    eff[k] = ch.h_direct[k] + ch.G_cascaded[k] * psi;
  return receive(eff, pilots.X, noise_var, rng);
}

Eigen::MatrixXcd phase2_element_receive(const ChannelRealization& ch, int l,
                                        const PilotMatrix& pilots,
                                        double noise_var, double eps_on,
                                        double eps_off, Rng& rng) {
  const int L = static_cast<int>(ch.H_bs_lis.cols());
  const LisState lis = lis_single_on(L, l, eps_on, eps_off);
  const Eigen::VectorXcd psi = reflect_vector(lis);
  std::vector<Eigen::VectorXcd> eff(ch.h_direct.size());
  for (std::size_t k = 0; k < eff.size(); ++k)
    eff[k] = ch.h_direct[k] + ch.G_cascaded[k] * psi;
  return receive(eff, pilots.X, noise_var, rng);
}

Eigen::MatrixXcd phase2_joint_receive(const ChannelRealization& ch,
                                      const PilotMatrix& pilots,
                                      double noise_var, double eps_on,
                                      Rng& rng) {
  const Eigen::Index M = ch.h_direct[0].size();
  const Eigen::Index L = ch.H_bs_lis.cols();
  if (pilots.X_bar.rows() != M * L)
    throw data_error("phase2_joint_receive: X_bar missing or wrong size");
  std::vector<Eigen::VectorXcd> eff(ch.h_direct.size());
  for (std::size_t k = 0; k < eff.size(); ++k) {
    Eigen::VectorXcd c(M * L);
    for (Eigen::Index l = 0; l < L; ++l)
      c.segment(l * M, M) =
          ch.h_direct[k] + (1.0 - eps_on) * ch.G_cascaded[k].col(l);
    eff[k] = c;
  }
  return receive(eff, pilots.X_bar, noise_var, rng);
}

PilotMatrix corrupt_pilots(const PilotMatrix& pilots, double snr_x_db, Rng& rng,
                           double log_scale) {
  if (std::isnan(snr_x_db))
    throw config_error("corrupt_pilots: snr_x_db must not be NaN");
  PilotMatrix out = pilots;
  const double var = variance_from_snr_db(snr_x_db, log_scale);
  if (var == 0.0) return out;
  for (Eigen::Index c = 0; c < out.X.cols(); ++c)
    for (Eigen::Index r = 0; r < out.X.rows(); ++r)
      out.X(r, c) += rng.cgaussian(var);
  for (Eigen::Index c = 0; c < out.X_bar.cols(); ++c)
    for (Eigen::Index r = 0; r < out.X_bar.rows(); ++r)
      out.X_bar(r, c) += rng.cgaussian(var);
  return out;
}

}  // namespace lischan
