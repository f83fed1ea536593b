// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "ls.hpp"

#include <Eigen/SVD>

#include "errors.hpp"

namespace lischan {

namespace {

constexpr double kRankTol = 1e-12;

// Cholesky of the normal matrix, with an explicit rank check on X.
Eigen::LLT<Eigen::MatrixXcd> normal_factor(const Eigen::MatrixXcd& X,
                                           const char* who) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(X);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) < kRankTol * sv(0))
    throw numeric_error(std::string(who) + ": pilot matrix is rank deficient");
  Eigen::LLT<Eigen::MatrixXcd> llt(X * X.adjoint());
  if (llt.info() != Eigen::Success)
    throw numeric_error(std::string(who) + ": normal matrix factorization failed");
  return llt;
}

Eigen::VectorXcd solve_ls(const Eigen::LLT<Eigen::MatrixXcd>& llt,
                          const Eigen::MatrixXcd& X,
                          const Eigen::RowVectorXcd& y) {
  // (y X^H A^{-1})^H = A^{-1} X y^H with A = X X^H Hermitian.
  return llt.solve(X * y.adjoint());
}

}  // namespace

Eigen::VectorXcd ls_direct(const Eigen::RowVectorXcd& y,
                           const Eigen::MatrixXcd& X) {
  if (y.size() != X.cols())
    throw data_error("ls_direct: observation/pilot length mismatch");
  return solve_ls(normal_factor(X, "ls_direct"), X, y);
}

Eigen::MatrixXcd ls_cascaded_per_column(
    const std::vector<Eigen::RowVectorXcd>& y_cols, const Eigen::MatrixXcd& X,
    const Eigen::VectorXcd& h_direct_hat) {
  if (h_direct_hat.size() != X.rows())
    throw data_error("ls_cascaded_per_column: h_direct_hat length mismatch");
  const auto llt = normal_factor(X, "ls_cascaded_per_column");
  Eigen::MatrixXcd G(X.rows(), static_cast<Eigen::Index>(y_cols.size()));
  for (std::size_t l = 0; l < y_cols.size(); ++l) {
    if (y_cols[l].size() != X.cols())
      throw data_error("ls_cascaded_per_column: observation length mismatch");
    G.col(static_cast<Eigen::Index>(l)) =
        solve_ls(llt, X, y_cols[l]) - h_direct_hat;
  }
  return G;
}

Eigen::MatrixXcd ls_cascaded_joint(const Eigen::RowVectorXcd& y_joint,
                                   const Eigen::MatrixXcd& X_bar,
                                   const Eigen::VectorXcd& h_direct_hat) {
  const Eigen::Index M = h_direct_hat.size();
  const Eigen::Index ML = X_bar.rows();
  if (ML % M != 0 || y_joint.size() != X_bar.cols())
    throw data_error("ls_cascaded_joint: dimension mismatch");
  const Eigen::Index L = ML / M;
  const Eigen::VectorXcd gbar =
      solve_ls(normal_factor(X_bar, "ls_cascaded_joint"), X_bar, y_joint);
  Eigen::MatrixXcd G(M, L);
  for (Eigen::Index l = 0; l < L; ++l)
    G.col(l) = gbar.segment(l * M, M) - h_direct_hat;
  return G;
}

}  // namespace lischan
