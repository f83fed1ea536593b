// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "errors.hpp"
#include "net.hpp"

using namespace lischan;

namespace {

Eigen::VectorXd flat_grads(Network& net) {
  Eigen::Index n = 0;
  for (Layer* l : net.layers())
    if (auto* g = l->grads()) n += g->size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (Layer* l : net.layers())
    if (auto* g = l->grads()) {
      out.segment(at, g->size()) = *g;
      at += g->size();
    }
  return out;
}

double loss_at(Network& net, const Eigen::VectorXd& theta,
               const Eigen::MatrixXd& in, const Eigen::MatrixXd& label,
               std::uint64_t rng_seed) {
  net.set_flat_params(theta);
  // The dropout mask must repeat between evaluations for finite differences
  // to be valid, so each evaluation re-seeds the stream.
  Rng rng(rng_seed);
  return mse_loss(net.forward(in, true, rng), label);
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
           "/lischan_test_" + name;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("architecture presets") {
  const auto arch = channelnet_arch(32);
  REQUIRE(arch.size() == 9);
  CHECK(arch[0].kind == LayerKind::input);
  CHECK(arch[1].filters == 256);
  CHECK(arch[4].units == 1024);
  CHECK(arch[5].drop_prob == 0.5);
  CHECK(arch[8].kind == LayerKind::regression_output);
  CHECK(arch[8].units == 32);
  for (const auto& s : arch)
    CHECK(LayerSpec::from_json(s.to_json()).to_json() == s.to_json());

  CHECK_THROWS_AS(Network(2, 2, 3, {}, 1), config_error);
  // conv after a fully connected layer has no spatial shape
  CHECK_THROWS_AS(Network(2, 2, 3,
                          {{LayerKind::input},
                           {LayerKind::fully_connected, 0, 0, 0, 4, 0, true},
                           {LayerKind::conv, 2, 3, 3, 0, 0, true}},
                          1),
                  config_error);
}

TEST_CASE("mse loss and gradient") {
  Eigen::MatrixXd p(2, 2), z(2, 2);
  p << 1, 2, 3, 4;
  z << 1, 2, 3, 4;
  CHECK(mse_loss(p, z) == 0.0);
  z(1, 1) = 2.0;
  CHECK(mse_loss(p, z) == doctest::Approx(4.0 / 4.0));
  const auto g = mse_grad(p, z);
  CHECK(g(1, 1) == doctest::Approx(2.0 * 2.0 / 4.0));
  CHECK(g(0, 0) == 0.0);
}

TEST_CASE("finite differences confirm every layer kind's gradient") {
  // conv + relu, fc + relu, dropout and the linear regression head all in one
  // chain, checked at 64-bit precision.
  const std::vector<LayerSpec> arch{
      {LayerKind::input},
      {LayerKind::conv, 3, 3, 3, 0, 0.0, true},
      {LayerKind::fully_connected, 0, 0, 0, 6, 0.0, true},
      {LayerKind::dropout, 0, 0, 0, 0, 0.35, false},
      {LayerKind::regression_output, 0, 0, 0, 4, 0.0, false}};
  Network net(3, 3, 2, arch, 71);

  const int B = 3;
  Rng data_rng(101);
  Eigen::MatrixXd in(net.in_dim(), B), label(4, B);
  for (Eigen::Index i = 0; i < in.size(); ++i)
    in(i) = data_rng.gaussian() * 0.7;
  for (Eigen::Index i = 0; i < label.size(); ++i)
    label(i) = data_rng.gaussian();

  const std::uint64_t mask_seed = 42;
  const Eigen::VectorXd theta = net.flat_params();
  {
    Rng rng(mask_seed);
    const Eigen::MatrixXd pred = net.forward(in, true, rng);
    net.backward(mse_grad(pred, label));
  }
  const Eigen::VectorXd g_an = flat_grads(net);
  REQUIRE(g_an.size() == theta.size());

  const double eps = 1e-6;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp(i) += eps;
    tm(i) -= eps;
    const double fp = loss_at(net, tp, in, label, mask_seed);
    const double fm = loss_at(net, tm, in, label, mask_seed);
    const double g_fd = (fp - fm) / (2.0 * eps);
    const double denom = std::max(1e-6, std::abs(g_fd) + std::abs(g_an(i)));
    worst = std::max(worst, std::abs(g_fd - g_an(i)) / denom);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("sgd step applies classical momentum") {
  // Single weight + bias, input 1: pred = w + b, loss = (pred - 0)^2.
  Network net(1, 1, 1,
              {{LayerKind::input}, {LayerKind::regression_output, 0, 0, 0, 1, 0.0, false}},
              1);
  Eigen::VectorXd theta(2);
  theta << 2.0, 0.0;
  net.set_flat_params(theta);

  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.momentum = 0.9;

  Eigen::MatrixXd in = Eigen::MatrixXd::Ones(1, 1);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(1, 1);
  Rng rng(1);

  // step 1: pred 2, dL/dpred = 4, g = [4, 4], v = -0.4, theta = [1.6, -0.4]
  net.backward(mse_grad(net.forward(in, true, rng), z));
  sgd_step(net, cfg);
  Eigen::VectorXd p1 = net.flat_params();
  CHECK(p1(0) == doctest::Approx(1.6));
  CHECK(p1(1) == doctest::Approx(-0.4));

  // step 2: pred 1.2, g = 2.4, v = 0.9*(-0.4) - 0.24 = -0.6
  net.backward(mse_grad(net.forward(in, true, rng), z));
  sgd_step(net, cfg);
  Eigen::VectorXd p2 = net.flat_params();
  CHECK(p2(0) == doctest::Approx(1.0));
  CHECK(p2(1) == doctest::Approx(-1.0));
}

TEST_CASE("training fits a small linear problem and restores the best epoch") {
  const std::vector<LayerSpec> arch{
      {LayerKind::input},
      {LayerKind::fully_connected, 0, 0, 0, 8, 0.0, true},
      {LayerKind::regression_output, 0, 0, 0, 2, 0.0, false}};
  Network net(2, 2, 1, arch, 5);

  Rng rng(9);
  Eigen::MatrixXd A(2, 4);
  for (Eigen::Index i = 0; i < A.size(); ++i) A(i) = rng.gaussian();
  const int n_train = 96, n_val = 32;
  Eigen::MatrixXd tin(4, n_train), vin(4, n_val);
  for (Eigen::Index i = 0; i < tin.size(); ++i) tin(i) = rng.gaussian();
  for (Eigen::Index i = 0; i < vin.size(); ++i) vin(i) = rng.gaussian();
  const Eigen::MatrixXd tout = A * tin, vout = A * vin;

  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 60;
  cfg.patience = 5;
  cfg.seed = 3;

  const auto res = train(net, tin, tout, vin, vout, cfg);
  REQUIRE(!res.log.empty());
  CHECK(res.log.size() <= 60);
  CHECK(res.log.back().val_mse >= 0.0);
  CHECK(res.best_val_mse < res.log.front().val_mse);

  // best_val_mse is the minimum of the log and the restored parameters
  // reproduce it exactly.
  double mn = res.log.front().val_mse;
  for (const auto& e : res.log) mn = std::min(mn, e.val_mse);
  CHECK(res.best_val_mse == doctest::Approx(mn).epsilon(1e-12));
  Rng r2(0);
  CHECK(mse_loss(net.forward(vin, false, r2), vout) ==
        doctest::Approx(res.best_val_mse).epsilon(1e-12));

  SUBCASE("training is deterministic in the seed") {
    Network n2(2, 2, 1, arch, 5), n3(2, 2, 1, arch, 5);
    train(n2, tin, tout, vin, vout, cfg);
    CHECK((n2.flat_params() - net.flat_params()).norm() == 0.0);
    TrainConfig other = cfg;
    other.seed = 4;
    train(n3, tin, tout, vin, vout, other);
    CHECK((n3.flat_params() - net.flat_params()).norm() > 0.0);
  }
}

TEST_CASE("early stopping waits for patience consecutive non-improvements") {
  // A step size too small to change any parameter freezes the validation
  // loss, so epoch 1 is the only improvement over the initial infinity and
  // the loop must stop after exactly 1 + patience epochs.
  const std::vector<LayerSpec> arch{
      {LayerKind::input},
      {LayerKind::regression_output, 0, 0, 0, 1, 0.0, false}};
  Network net(1, 2, 1, arch, 2);

  Eigen::MatrixXd tin = Eigen::MatrixXd::Random(2, 8);
  Eigen::MatrixXd tout = Eigen::MatrixXd::Random(1, 8);
  TrainConfig cfg;
  cfg.learning_rate = 1e-300;
  cfg.batch_size = 8;
  cfg.max_epochs = 50;
  cfg.patience = 3;
  const auto res = train(net, tin, tout, tin, tout, cfg);
  CHECK(res.log.size() == 4);
  CHECK(res.best_epoch == 1);
}

TEST_CASE("train config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.momentum = 1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = TrainConfig{};
  CHECK(TrainConfig::from_json(cfg.to_json()).to_json() == cfg.to_json());
}

TEST_CASE("checkpoint round trip") {
  const std::vector<LayerSpec> arch{
      {LayerKind::input},
      {LayerKind::conv, 2, 3, 3, 0, 0.0, true},
      {LayerKind::regression_output, 0, 0, 0, 8, 0.0, false}};
  Network net(2, 2, 3, arch, 17);
  Checkpoint meta;
  meta.kind = SampleKind::direct;
  meta.M = 4;
  meta.L = 3;
  meta.norm.mean = {0.1, 0.2, 0.3};
  meta.norm.stddev = {1.0, 2.0, 3.0};
  meta.log = {{1, 0.5, 0.6, 0.7}, {2, 0.4, 0.5, 0.6}};

  TempFile f("net.ckpt");
  save_checkpoint(net, meta, f.path);
  auto [back, bmeta] = load_checkpoint(f.path);

  CHECK(bmeta.M == 4);
  CHECK(bmeta.L == 3);
  CHECK(bmeta.norm.mean == meta.norm.mean);
  REQUIRE(bmeta.log.size() == 2);
  CHECK(bmeta.log[1].val_mse == doctest::Approx(0.5));
  CHECK(back.in_h() == 2);
  CHECK(back.out_dim() == 8);

  SUBCASE("re-save is byte-identical") {
    TempFile g("net2.ckpt");
    save_checkpoint(back, bmeta, g.path);
    CHECK(read_file(f.path) == read_file(g.path));
  }
  SUBCASE("prediction works against the loaded net") {
    Eigen::RowVectorXcd y = Eigen::RowVectorXcd::Ones(4);
    const auto h = predict_direct(back, y, bmeta.norm, 4);
    CHECK(h.size() == 4);
    CHECK(h.allFinite());
  }
  SUBCASE("truncated checkpoint is rejected") {
    const std::string bytes = read_file(f.path);
    TempFile g("trunc.ckpt");
    std::ofstream os(g.path, std::ios::binary);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    os.close();
    CHECK_THROWS_AS(load_checkpoint(g.path), data_error);
  }
}

TEST_CASE("divergence raises a numerical failure") {
  const std::vector<LayerSpec> arch{
      {LayerKind::input},
      {LayerKind::fully_connected, 0, 0, 0, 8, 0.0, true},
      {LayerKind::regression_output, 0, 0, 0, 1, 0.0, false}};
  Network net(2, 2, 1, arch, 1);
  Eigen::MatrixXd tin = 1e3 * Eigen::MatrixXd::Random(4, 32);
  Eigen::MatrixXd tout = 1e3 * Eigen::MatrixXd::Random(1, 32);
  TrainConfig cfg;
  cfg.learning_rate = 1e6;  // guaranteed blow-up
  cfg.batch_size = 8;
  cfg.max_epochs = 50;
  CHECK_THROWS_AS(train(net, tin, tout, tin, tout, cfg), numeric_error);
}
