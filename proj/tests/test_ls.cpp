// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "errors.hpp"
#include "ls.hpp"
#include "pilots.hpp"

using namespace lischan;

namespace {

ScenarioConfig desk() {
  ScenarioConfig c;
  c.M = 16;
  c.L = 8;
  c.K = 2;
  c.P = 16;
  c.seed = 7;
  return c;
}

std::vector<Eigen::RowVectorXcd> element_rows(const ChannelRealization& ch,
                                              const PilotMatrix& pm, int k,
                                              double noise_var, Rng& rng) {
  const int L = static_cast<int>(ch.H_bs_lis.cols());
  std::vector<Eigen::RowVectorXcd> rows(L);
  for (int l = 0; l < L; ++l)
    rows[l] = phase2_element_receive(ch, l, pm, noise_var, 0.0, 0.0, rng).row(k);
  return rows;
}

}  // namespace

TEST_CASE("noiseless LS recovers the channels exactly") {
  const auto cfg = desk();
  Rng rng(31);
  const auto ch = draw_channels(cfg, rng);
  const auto pm = make_pilots(cfg.M, cfg.P, cfg.L);

  for (int k = 0; k < cfg.K; ++k) {
    const auto y1 = phase1_receive(ch, lis_all_off(cfg.L), pm, 0.0, rng);
    const Eigen::VectorXcd h_hat = ls_direct(y1.row(k), pm.X);
    CHECK((h_hat - ch.h_direct[k]).norm() <= 1e-9 * ch.h_direct[k].norm());

    const auto rows = element_rows(ch, pm, k, 0.0, rng);
    const Eigen::MatrixXcd Gp = ls_cascaded_per_column(rows, pm.X, h_hat);
    CHECK((Gp - ch.G_cascaded[k]).norm() <= 1e-9 * ch.G_cascaded[k].norm());

    const auto yj = phase2_joint_receive(ch, pm, 0.0, 0.0, rng);
    const Eigen::MatrixXcd Gj = ls_cascaded_joint(yj.row(k), pm.X_bar, h_hat);
    CHECK((Gj - ch.G_cascaded[k]).norm() <= 1e-9 * ch.G_cascaded[k].norm());
  }
}

TEST_CASE("per-column and joint estimates coincide on noise-free inputs") {
  const auto cfg = desk();
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    Rng rng(seed);
    const auto ch = draw_channels(cfg, rng);
    const auto pm = make_pilots(cfg.M, cfg.P, cfg.L);
    // Direct-channel noise is shared by construction: both phase-II
    // estimators subtract the same h_hat.
    const auto y1 = phase1_receive(ch, lis_all_off(cfg.L), pm, 0.01, rng);
    const Eigen::VectorXcd h_hat = ls_direct(y1.row(0), pm.X);
    const auto rows = element_rows(ch, pm, 0, 0.0, rng);
    const auto yj = phase2_joint_receive(ch, pm, 0.0, 0.0, rng);
    const Eigen::MatrixXcd Gp = ls_cascaded_per_column(rows, pm.X, h_hat);
    const Eigen::MatrixXcd Gj = ls_cascaded_joint(yj.row(0), pm.X_bar, h_hat);
    CHECK((Gp - Gj).norm() <= 1e-9 * Gp.norm());
  }
}

TEST_CASE("direct LS error power matches sigma^2 M / P") {
  // E ||h_hat - h||^2 = sigma_n^2 tr((X X^H)^{-1}) = sigma_n^2 M / P for the
  // orthogonal pilot set.
  const auto cfg = desk();
  Rng rng(37);
  const auto ch = draw_channels(cfg, rng);
  const auto pm = make_pilots(cfg.M, cfg.P, cfg.L);
  const double nv = 0.2;
  const double want = nv * cfg.M / cfg.P;
  double acc = 0.0;
  const int reps = 2000;
  for (int i = 0; i < reps; ++i) {
    const auto y1 = phase1_receive(ch, lis_all_off(cfg.L), pm, nv, rng);
    acc += (ls_direct(y1.row(0), pm.X) - ch.h_direct[0]).squaredNorm();
  }
  CHECK(acc / reps == doctest::Approx(want).epsilon(0.1));
}

TEST_CASE("LS is invariant to a common scaling of pilots and observations") {
  const auto cfg = desk();
  Rng rng(41);
  const auto ch = draw_channels(cfg, rng);
  const auto pm = make_pilots(cfg.M, cfg.P, cfg.L);
  const auto y1 = phase1_receive(ch, lis_all_off(cfg.L), pm, 0.05, rng);
  const Eigen::VectorXcd a = ls_direct(y1.row(0), pm.X);
  const Eigen::VectorXcd b = ls_direct(3.0 * y1.row(0), 3.0 * pm.X);
  CHECK((a - b).norm() <= 1e-10 * a.norm());
}

TEST_CASE("degenerate inputs are rejected") {
  const auto pm = make_pilots(4, 4, 2);
  Eigen::RowVectorXcd y = Eigen::RowVectorXcd::Ones(4);

  SUBCASE("rank-deficient pilot matrix") {
    Eigen::MatrixXcd X = pm.X;
    X.row(2) = X.row(1);
    CHECK_THROWS_AS(ls_direct(y, X), numeric_error);
  }
  SUBCASE("length mismatch") {
    Eigen::RowVectorXcd bad = Eigen::RowVectorXcd::Ones(5);
    CHECK_THROWS_AS(ls_direct(bad, pm.X), data_error);
    CHECK_THROWS_AS(
        ls_cascaded_per_column({bad, bad}, pm.X, Eigen::VectorXcd::Zero(4)),
        data_error);
    CHECK_THROWS_AS(
        ls_cascaded_joint(y, pm.X_bar, Eigen::VectorXcd::Zero(4)), data_error);
    CHECK_THROWS_AS(
        ls_cascaded_joint(Eigen::RowVectorXcd::Ones(8), pm.X_bar,
                          Eigen::VectorXcd::Zero(3)),
        data_error);
  }
}
