// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Self-contained trainable regression network: convolutional and fully
// connected layers, inverted dropout, MSE loss, SGD with momentum and
// validation-based early stopping.  Layers operate on batches; each column of
// a matrix is one flattened sample.

#pragma once

#include <memory>
#include <optional>

#include "dataset.hpp"
#include "ls.hpp"

namespace lischan {

enum class LayerKind { input, conv, fully_connected, dropout, regression_output };

struct LayerSpec {
  LayerKind kind = LayerKind::input;
  int filters = 0, kh = 0, kw = 0;  // conv
  int units = 0;                    // fully connected / regression output
  double drop_prob = 0.0;           // dropout
  bool relu = false;

  nlohmann::json to_json() const;
  static LayerSpec from_json(const nlohmann::json& j);
};

// The 9-layer twin-network preset: three 256-filter 3x3 conv layers, FC
// layers of 1024 and 2048 units each followed by 50% dropout, and a linear
// regression output.  Output width is resolved from the dataset.
std::vector<LayerSpec> channelnet_arch(int out_dim);

// Scaled-down variant for small scenarios; same layer sequence.
std::vector<LayerSpec> make_arch(const std::vector<int>& conv_filters,
                                 int conv_size, const std::vector<int>& fc_units,
                                 double dropout, int out_dim);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Eigen::MatrixXd forward(const Eigen::MatrixXd& in, bool train,
                                  Rng& rng) = 0;
  // grad_out is dLoss/d(output); param gradients are accumulated internally
  // as sums over the batch.
  virtual Eigen::MatrixXd backward(const Eigen::MatrixXd& grad_out) = 0;
  virtual Eigen::VectorXd* params() { return nullptr; }
  virtual Eigen::VectorXd* grads() { return nullptr; }
  virtual Eigen::VectorXd* momenta() { return nullptr; }
  virtual LayerSpec spec() const = 0;
  virtual int out_dim() const = 0;
};

struct TrainConfig {
  double learning_rate = 0.0002;
  double momentum = 0.9;
  int batch_size = 128;
  int patience = 3;
  int max_epochs = 100;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

struct EpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double val_nmse = 0.0;
};

class Network {
 public:
  Network(int in_h, int in_w, int in_c, const std::vector<LayerSpec>& arch,
          std::uint64_t seed);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& in, bool train, Rng& rng);
  void backward(const Eigen::MatrixXd& grad_out);

  int in_h() const { return in_h_; }
  int in_w() const { return in_w_; }
  int in_c() const { return in_c_; }
  int in_dim() const { return in_h_ * in_w_ * in_c_; }
  int out_dim() const;
  std::uint64_t seed() const { return seed_; }
  const std::vector<LayerSpec>& arch() const { return arch_; }

  std::vector<Layer*> layers();
  Eigen::VectorXd flat_params() const;
  void set_flat_params(const Eigen::VectorXd& p);
  Eigen::VectorXd flat_momenta() const;
  void set_flat_momenta(const Eigen::VectorXd& m);

  std::vector<EpochLog> log;

 private:
  int in_h_, in_w_, in_c_;
  std::uint64_t seed_;
  std::vector<LayerSpec> arch_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

// Mean squared error (1/dim) * sum (p - z)^2, averaged over batch columns.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label);
Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& pred,
                         const Eigen::MatrixXd& label);

// v <- momentum*v - lr*g; theta <- theta + v (applied layer by layer).
void sgd_step(Network& net, const TrainConfig& cfg);

struct TrainResult {
  std::vector<EpochLog> log;
  double best_val_mse = 0.0;
  int best_epoch = 0;
};

// Epoch loop with shuffled mini-batches; stops when the validation MSE has
// not improved for cfg.patience consecutive epochs and restores the best
// snapshot.  Throws numeric_error on non-finite loss.
TrainResult train(Network& net, const Eigen::MatrixXd& train_in,
                  const Eigen::MatrixXd& train_out,
                  const Eigen::MatrixXd& val_in,
                  const Eigen::MatrixXd& val_out, const TrainConfig& cfg);

// Checkpoint container: JSON header + little-endian float32 parameter and
// momentum blobs.  Carries the normalization statistics and channel
// dimensions needed at prediction time.
struct Checkpoint {
  SampleKind kind = SampleKind::direct;
  int M = 0, L = 0;
  NormStats norm;
  std::vector<EpochLog> log;
};

void save_checkpoint(const Network& net, const Checkpoint& meta,
                     const std::string& path);
std::pair<Network, Checkpoint> load_checkpoint(const std::string& path);

// Runs both networks on the received pilots and de-vectorizes the outputs
// into a channel estimate.
ChannelEstimate predict_channel(Network& net_direct, Network& net_cascaded,
                                const Eigen::RowVectorXcd& y_direct,
                                const std::vector<Eigen::RowVectorXcd>& y_cols,
                                const NormStats& norm_direct,
                                const NormStats& norm_cascaded, int M, int L);

Eigen::VectorXcd predict_direct(Network& net, const Eigen::RowVectorXcd& y,
                                const NormStats& norm, int M);
Eigen::MatrixXcd predict_cascaded(Network& net,
                                  const std::vector<Eigen::RowVectorXcd>& y_cols,
                                  const NormStats& norm, int M, int L);

}  // namespace lischan
