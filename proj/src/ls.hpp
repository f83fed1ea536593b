// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#pragma once

#include <vector>

#include "channel.hpp"

namespace lischan {

enum class EstimationMethod { ls_direct, ls_per_column, ls_joint, channelnet };

struct ChannelEstimate {
  Eigen::VectorXcd h_direct;  // M x 1
  Eigen::MatrixXcd G;         // M x L
  EstimationMethod method = EstimationMethod::ls_direct;
};

// h_hat = (y X^H (X X^H)^{-1})^H.  Throws numeric_error on rank deficiency
// (smallest singular value of X below 1e-12 of the largest).
Eigen::VectorXcd ls_direct(const Eigen::RowVectorXcd& y,
                           const Eigen::MatrixXcd& X);

// Column l: g_hat = (y_l X^H (X X^H)^{-1})^H - h_direct_hat.
Eigen::MatrixXcd ls_cascaded_per_column(
    const std::vector<Eigen::RowVectorXcd>& y_cols, const Eigen::MatrixXcd& X,
    const Eigen::VectorXcd& h_direct_hat);

// Joint: gbar_hat = (ybar X_bar^H (X_bar X_bar^H)^{-1})^H - 1_L (x) h_hat,
// de-stacked into M x L.
Eigen::MatrixXcd ls_cascaded_joint(const Eigen::RowVectorXcd& y_joint,
                                   const Eigen::MatrixXcd& X_bar,
                                   const Eigen::VectorXcd& h_direct_hat);

}  // namespace lischan
