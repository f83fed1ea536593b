// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "net.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace lischan {

namespace {

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::input: return "input";
    case LayerKind::conv: return "conv";
    case LayerKind::fully_connected: return "fully_connected";
    case LayerKind::dropout: return "dropout";
    case LayerKind::regression_output: return "regression_output";
  }
  return "?";
}

LayerKind kind_from_name(const std::string& s) {
  if (s == "input") return LayerKind::input;
  if (s == "conv") return LayerKind::conv;
  if (s == "fully_connected") return LayerKind::fully_connected;
  if (s == "dropout") return LayerKind::dropout;
  if (s == "regression_output") return LayerKind::regression_output;
  throw config_error("layer: unknown kind " + s);
}

void init_weights(Eigen::Ref<Eigen::VectorXd> w, int fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index i = 0; i < w.size(); ++i)
    w(i) = rng.uniform(-bound, bound);
}

// Convolution, stride 1, zero padding preserving the spatial size, optional
// rectified-linear activation.  Input columns are flattened (c, col, row)
// channel-major tensors.
class ConvLayer final : public Layer {
 public:
  ConvLayer(int in_h, int in_w, int in_c, int filters, int kh, int kw,
            bool relu, Rng& rng)
      : in_h_(in_h), in_w_(in_w), in_c_(in_c), f_(filters), kh_(kh), kw_(kw),
        relu_(relu) {
    const int k2c = kh_ * kw_ * in_c_;
    params_.resize(static_cast<Eigen::Index>(f_) * k2c + f_);
    grads_ = Eigen::VectorXd::Zero(params_.size());
    momenta_ = Eigen::VectorXd::Zero(params_.size());
    init_weights(params_.head(static_cast<Eigen::Index>(f_) * k2c), k2c, rng);
    params_.tail(f_).setZero();
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& in, bool /*train*/,
                          Rng& /*rng*/) override {
    const Eigen::Index B = in.cols();
    const int hw = in_h_ * in_w_;
    const int k2c = kh_ * kw_ * in_c_;
    cols_.resize(k2c, static_cast<Eigen::Index>(hw) * B);
    cols_.setZero();
    const int ph = (kh_ - 1) / 2, pw = (kw_ - 1) / 2;
    for (Eigen::Index s = 0; s < B; ++s) {
      const double* src = in.col(s).data();
      for (int oc = 0; oc < in_w_; ++oc)
        for (int orow = 0; orow < in_h_; ++orow) {
          const Eigen::Index col = s * hw + oc * in_h_ + orow;
          double* dst = cols_.col(col).data();
          for (int c = 0; c < in_c_; ++c)
            for (int di = 0; di < kh_; ++di) {
              const int r = orow + di - ph;
              if (r < 0 || r >= in_h_) continue;
              for (int dj = 0; dj < kw_; ++dj) {
                const int cc = oc + dj - pw;
                if (cc < 0 || cc >= in_w_) continue;
                dst[(c * kh_ + di) * kw_ + dj] =
                    src[c * hw + cc * in_h_ + r];
              }
            }
        }
    }

    const auto W = weight_map();
    resp_ = W * cols_;
    resp_.colwise() += params_.tail(f_);
    if (relu_) resp_ = resp_.cwiseMax(0.0);

    Eigen::MatrixXd out(static_cast<Eigen::Index>(f_) * hw, B);
    for (Eigen::Index s = 0; s < B; ++s)
      for (int p = 0; p < hw; ++p)
        for (int f = 0; f < f_; ++f)
          out(static_cast<Eigen::Index>(f) * hw + p, s) = resp_(f, s * hw + p);
    return out;
  }

  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad_out) override {
    const Eigen::Index B = grad_out.cols();
    const int hw = in_h_ * in_w_;
    Eigen::MatrixXd d_resp(f_, static_cast<Eigen::Index>(hw) * B);
    for (Eigen::Index s = 0; s < B; ++s)
      for (int p = 0; p < hw; ++p)
        for (int f = 0; f < f_; ++f)
          d_resp(f, s * hw + p) =
              grad_out(static_cast<Eigen::Index>(f) * hw + p, s);
    if (relu_)
      d_resp = d_resp.cwiseProduct(
          (resp_.array() > 0.0).cast<double>().matrix());

    const int k2c = kh_ * kw_ * in_c_;
    Eigen::Map<Eigen::MatrixXd> gW(grads_.data(), f_, k2c);
    gW = d_resp * cols_.transpose();
    grads_.tail(f_) = d_resp.rowwise().sum();

    const Eigen::MatrixXd d_cols = weight_map().transpose() * d_resp;
    Eigen::MatrixXd gin =
        Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(in_c_) * hw, B);
    const int ph = (kh_ - 1) / 2, pw = (kw_ - 1) / 2;
    for (Eigen::Index s = 0; s < B; ++s) {
      double* dst = gin.col(s).data();
      for (int oc = 0; oc < in_w_; ++oc)
        for (int orow = 0; orow < in_h_; ++orow) {
          const Eigen::Index col = s * hw + oc * in_h_ + orow;
          const double* src = d_cols.col(col).data();
          for (int c = 0; c < in_c_; ++c)
            for (int di = 0; di < kh_; ++di) {
              const int r = orow + di - ph;
              if (r < 0 || r >= in_h_) continue;
              for (int dj = 0; dj < kw_; ++dj) {
                const int cc = oc + dj - pw;
                if (cc < 0 || cc >= in_w_) continue;
                dst[c * hw + cc * in_h_ + r] +=
                    src[(c * kh_ + di) * kw_ + dj];
              }
            }
        }
    }
    return gin;
  }

  Eigen::VectorXd* params() override { return &params_; }
  Eigen::VectorXd* grads() override { return &grads_; }
  Eigen::VectorXd* momenta() override { return &momenta_; }
  LayerSpec spec() const override {
    return {LayerKind::conv, f_, kh_, kw_, 0, 0.0, relu_};
  }
  int out_dim() const override { return f_ * in_h_ * in_w_; }

 private:
  Eigen::Map<const Eigen::MatrixXd> weight_map() const {
    return {params_.data(), f_, kh_ * kw_ * in_c_};
  }

  int in_h_, in_w_, in_c_, f_, kh_, kw_;
  bool relu_;
  Eigen::VectorXd params_, grads_, momenta_;
  Eigen::MatrixXd cols_, resp_;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(int in_dim, int units, bool relu, bool is_output, Rng& rng)
      : in_(in_dim), out_(units), relu_(relu), is_output_(is_output) {
    params_.resize(static_cast<Eigen::Index>(out_) * in_ + out_);
    grads_ = Eigen::VectorXd::Zero(params_.size());
    momenta_ = Eigen::VectorXd::Zero(params_.size());
    init_weights(params_.head(static_cast<Eigen::Index>(out_) * in_), in_, rng);
    params_.tail(out_).setZero();
  }

  Eigen::MatrixXd forward(const Eigen::MatrixXd& in, bool /*train*/,
                          Rng& /*rng*/) override {
    in_cache_ = in;
    Eigen::Map<const Eigen::MatrixXd> W(params_.data(), out_, in_);
    act_ = W * in;
    act_.colwise() += params_.tail(out_);
    if (relu_) act_ = act_.cwiseMax(0.0);
    return act_;
  }

  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad_out) override {
    Eigen::MatrixXd d = grad_out;
    if (relu_)
      d = d.cwiseProduct((act_.array() > 0.0).cast<double>().matrix());
    Eigen::Map<Eigen::MatrixXd> gW(grads_.data(), out_, in_);
    gW = d * in_cache_.transpose();
    grads_.tail(out_) = d.rowwise().sum();
    Eigen::Map<const Eigen::MatrixXd> W(params_.data(), out_, in_);
    return W.transpose() * d;
  }

  Eigen::VectorXd* params() override { return &params_; }
  Eigen::VectorXd* grads() override { return &grads_; }
  Eigen::VectorXd* momenta() override { return &momenta_; }
  LayerSpec spec() const override {
    return {is_output_ ? LayerKind::regression_output
                       : LayerKind::fully_connected,
            0, 0, 0, out_, 0.0, relu_};
  }
  int out_dim() const override { return out_; }

 private:
  int in_, out_;
  bool relu_, is_output_;
  Eigen::VectorXd params_, grads_, momenta_;
  Eigen::MatrixXd in_cache_, act_;
};

// Inverted dropout: surviving activations are scaled by 1/keep at train
// time, so inference needs no rescaling.
class DropoutLayer final : public Layer {
 public:
  DropoutLayer(int dim, double drop_prob) : dim_(dim), drop_(drop_prob) {}

  Eigen::MatrixXd forward(const Eigen::MatrixXd& in, bool train,
                          Rng& rng) override {
    if (!train || drop_ <= 0.0) {
      mask_.resize(0, 0);
      return in;
    }
    const double keep = 1.0 - drop_;
    mask_.resize(in.rows(), in.cols());
    for (Eigen::Index c = 0; c < in.cols(); ++c)
      for (Eigen::Index r = 0; r < in.rows(); ++r)
        mask_(r, c) = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return in.cwiseProduct(mask_);
  }

  Eigen::MatrixXd backward(const Eigen::MatrixXd& grad_out) override {
    if (mask_.size() == 0) return grad_out;
    return grad_out.cwiseProduct(mask_);
  }

  LayerSpec spec() const override {
    return {LayerKind::dropout, 0, 0, 0, 0, drop_, false};
  }
  int out_dim() const override { return dim_; }

 private:
  int dim_;
  double drop_;
  Eigen::MatrixXd mask_;
};

}  // namespace

nlohmann::json LayerSpec::to_json() const {
  return {{"kind", kind_name(kind)}, {"filters", filters}, {"kh", kh},
          {"kw", kw},                {"units", units},     {"drop_prob", drop_prob},
          {"relu", relu}};
}

LayerSpec LayerSpec::from_json(const nlohmann::json& j) {
  LayerSpec s;
  s.kind = kind_from_name(j.at("kind").get<std::string>());
  s.filters = j.value("filters", 0);
  s.kh = j.value("kh", 0);
  s.kw = j.value("kw", 0);
  s.units = j.value("units", 0);
  s.drop_prob = j.value("drop_prob", 0.0);
  s.relu = j.value("relu", false);
  return s;
}

std::vector<LayerSpec> channelnet_arch(int out_dim) {
  return make_arch({256, 256, 256}, 3, {1024, 2048}, 0.5, out_dim);
}

std::vector<LayerSpec> make_arch(const std::vector<int>& conv_filters,
                                 int conv_size, const std::vector<int>& fc_units,
                                 double dropout, int out_dim) {
  std::vector<LayerSpec> arch;
  arch.push_back({LayerKind::input});
  for (int f : conv_filters)
    arch.push_back({LayerKind::conv, f, conv_size, conv_size, 0, 0.0, true});
  for (int u : fc_units) {
    arch.push_back({LayerKind::fully_connected, 0, 0, 0, u, 0.0, true});
    if (dropout > 0.0)
      arch.push_back({LayerKind::dropout, 0, 0, 0, 0, dropout, false});
  }
  arch.push_back({LayerKind::regression_output, 0, 0, 0, out_dim, 0.0, false});
  return arch;
}

Network::Network(int in_h, int in_w, int in_c,
                 const std::vector<LayerSpec>& arch, std::uint64_t seed)
    : in_h_(in_h), in_w_(in_w), in_c_(in_c), seed_(seed), arch_(arch) {
  if (arch.empty() || arch.front().kind != LayerKind::input)
    throw config_error("network: arch must start with an input layer");
  int h = in_h, w = in_w, c = in_c;
  bool spatial = true;
  int flat = h * w * c;
  for (std::size_t i = 1; i < arch.size(); ++i) {
    const LayerSpec& s = arch[i];
    Rng rng(derive_seed(seed, 0x1417, i));
    switch (s.kind) {
      case LayerKind::conv: {
        if (!spatial)
          throw config_error("network: conv after fully connected layer");
        layers_.push_back(std::make_unique<ConvLayer>(h, w, c, s.filters, s.kh,
                                                      s.kw, s.relu, rng));
        c = s.filters;
        flat = h * w * c;
        break;
      }
      case LayerKind::fully_connected:
      case LayerKind::regression_output: {
        layers_.push_back(std::make_unique<DenseLayer>(
            flat, s.units, s.relu, s.kind == LayerKind::regression_output,
            rng));
        spatial = false;
        flat = s.units;
        break;
      }
      case LayerKind::dropout:
        layers_.push_back(std::make_unique<DropoutLayer>(flat, s.drop_prob));
        break;
      case LayerKind::input:
        throw config_error("network: duplicate input layer");
    }
  }
  if (layers_.empty()) throw config_error("network: no layers");
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& in, bool train,
                                 Rng& rng) {
  if (in.rows() != in_dim())
    throw data_error("network: input dimension mismatch");
  Eigen::MatrixXd x = in;
  for (auto& l : layers_) x = l->forward(x, train, rng);
  return x;
}

void Network::backward(const Eigen::MatrixXd& grad_out) {
  Eigen::MatrixXd g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    g = (*it)->backward(g);
}

int Network::out_dim() const { return layers_.back()->out_dim(); }

std::vector<Layer*> Network::layers() {
  std::vector<Layer*> out;
  for (auto& l : layers_) out.push_back(l.get());
  return out;
}

Eigen::VectorXd Network::flat_params() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_)
    if (auto* p = const_cast<Layer&>(*l).params()) n += p->size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& l : layers_)
    if (auto* p = const_cast<Layer&>(*l).params()) {
      out.segment(at, p->size()) = *p;
      at += p->size();
    }
  return out;
}

void Network::set_flat_params(const Eigen::VectorXd& p) {
  Eigen::Index at = 0;
  for (auto& l : layers_)
    if (auto* q = l->params()) {
      if (at + q->size() > p.size())
        throw data_error("network: parameter blob too short");
      *q = p.segment(at, q->size());
      at += q->size();
    }
  if (at != p.size()) throw data_error("network: parameter blob too long");
}

Eigen::VectorXd Network::flat_momenta() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_)
    if (auto* p = const_cast<Layer&>(*l).momenta()) n += p->size();
  Eigen::VectorXd out(n);
  Eigen::Index at = 0;
  for (const auto& l : layers_)
    if (auto* p = const_cast<Layer&>(*l).momenta()) {
      out.segment(at, p->size()) = *p;
      at += p->size();
    }
  return out;
}

void Network::set_flat_momenta(const Eigen::VectorXd& m) {
  Eigen::Index at = 0;
  for (auto& l : layers_)
    if (auto* q = l->momenta()) {
      *q = m.segment(at, q->size());
      at += q->size();
    }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw config_error("train: learning_rate > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw config_error("train: momentum in [0, 1)");
  if (batch_size < 1) throw config_error("train: batch_size >= 1");
  if (patience < 1) throw config_error("train: patience >= 1");
  if (max_epochs < 1) throw config_error("train: max_epochs >= 1");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"learning_rate", learning_rate}, {"momentum", momentum},
          {"batch_size", batch_size},       {"patience", patience},
          {"max_epochs", max_epochs},       {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.momentum = j.value("momentum", c.momentum);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.patience = j.value("patience", c.patience);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("train: malformed JSON: ") + e.what());
  }
  c.validate();
  return c;
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& label) {
  if (pred.rows() != label.rows() || pred.cols() != label.cols())
    throw data_error("mse_loss: shape mismatch");
  return (pred - label).squaredNorm() /
         (static_cast<double>(pred.rows()) * pred.cols());
}

Eigen::MatrixXd mse_grad(const Eigen::MatrixXd& pred,
                         const Eigen::MatrixXd& label) {
  return 2.0 * (pred - label) /
         (static_cast<double>(pred.rows()) * pred.cols());
}

void sgd_step(Network& net, const TrainConfig& cfg) {
  for (Layer* l : net.layers()) {
    auto* p = l->params();
    if (!p) continue;
    auto* g = l->grads();
    auto* v = l->momenta();
    *v = cfg.momentum * *v - cfg.learning_rate * *g;
    *p += *v;
  }
}

namespace {

double validation_nmse(const Eigen::MatrixXd& pred,
                       const Eigen::MatrixXd& label) {
  double acc = 0.0;
  for (Eigen::Index c = 0; c < pred.cols(); ++c) {
    const double denom = label.col(c).norm();
    if (denom > 0.0) acc += (pred.col(c) - label.col(c)).norm() / denom;
  }
  return acc / static_cast<double>(pred.cols());
}

}  // namespace

TrainResult train(Network& net, const Eigen::MatrixXd& train_in,
                  const Eigen::MatrixXd& train_out,
                  const Eigen::MatrixXd& val_in, const Eigen::MatrixXd& val_out,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_in.cols() == 0 || val_in.cols() == 0)
    throw data_error("train: empty dataset");

  const Eigen::Index n = train_in.cols();
  Rng rng(derive_seed(cfg.seed, 0x7ea1));
  Rng infer_rng(0);  // never consulted in infer mode

  TrainResult res;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_params = net.flat_params();
  int since_improve = 0;

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (Eigen::Index i = n; i > 1; --i)
      std::swap(order[i - 1],
                order[static_cast<Eigen::Index>(rng.uniform() * i)]);

    double epoch_loss = 0.0;
    Eigen::Index batches = 0;
    for (Eigen::Index at = 0; at < n; at += cfg.batch_size, ++batches) {
      const Eigen::Index b = std::min<Eigen::Index>(cfg.batch_size, n - at);
      Eigen::MatrixXd bin(train_in.rows(), b), bout(train_out.rows(), b);
      for (Eigen::Index i = 0; i < b; ++i) {
        bin.col(i) = train_in.col(order[at + i]);
        bout.col(i) = train_out.col(order[at + i]);
      }
      const Eigen::MatrixXd pred = net.forward(bin, true, rng);
      const double loss = mse_loss(pred, bout);
      if (!std::isfinite(loss))
        throw numeric_error("train: non-finite loss at epoch " +
                            std::to_string(epoch));
      epoch_loss += loss;
      net.backward(mse_grad(pred, bout));
      sgd_step(net, cfg);
    }

    const Eigen::MatrixXd vpred = net.forward(val_in, false, infer_rng);
    const double val_mse = mse_loss(vpred, val_out);
    if (!std::isfinite(val_mse))
      throw numeric_error("train: non-finite validation loss");
    res.log.push_back({epoch, epoch_loss / static_cast<double>(batches),
                       val_mse, validation_nmse(vpred, val_out)});

    if (val_mse < best_val) {
      best_val = val_mse;
      best_params = net.flat_params();
      res.best_epoch = epoch;
      since_improve = 0;
    } else if (++since_improve >= cfg.patience) {
      break;
    }
  }

  net.set_flat_params(best_params);
  res.best_val_mse = best_val;
  net.log = res.log;
  return res;
}

namespace {

constexpr char kCkptMagic[4] = {'L', 'C', 'C', 'K'};
constexpr std::uint8_t kCkptVersion = 1;

void write_f32_blob(std::ostream& os, const Eigen::VectorXd& v) {
  std::vector<float> buf(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    buf[static_cast<std::size_t>(i)] = static_cast<float>(v(i));
  os.write(reinterpret_cast<const char*>(buf.data()),
           static_cast<std::streamsize>(buf.size() * 4));
}

Eigen::VectorXd read_f32_blob(std::istream& is, Eigen::Index n) {
  std::vector<float> buf(static_cast<std::size_t>(n));
  is.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size() * 4));
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = buf[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

void save_checkpoint(const Network& net, const Checkpoint& meta,
                     const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data_error("save_checkpoint: cannot open " + path);

  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : net.arch()) layers.push_back(s.to_json());
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : meta.log)
    log.push_back({{"epoch", e.epoch},
                   {"train_mse", e.train_mse},
                   {"val_mse", e.val_mse},
                   {"val_nmse", e.val_nmse}});
  const nlohmann::json hdr{
      {"kind", meta.kind == SampleKind::direct ? "direct" : "cascaded"},
      {"M", meta.M},
      {"L", meta.L},
      {"in_h", net.in_h()},
      {"in_w", net.in_w()},
      {"in_c", net.in_c()},
      {"seed", net.seed()},
      {"arch", layers},
      {"norm", {{"mean", meta.norm.mean}, {"stddev", meta.norm.stddev}}},
      {"log", log}};
  const std::string h = hdr.dump();

  os.write(kCkptMagic, 4);
  os.put(static_cast<char>(kCkptVersion));
  const std::uint32_t hlen = static_cast<std::uint32_t>(h.size());
  os.write(reinterpret_cast<const char*>(&hlen), 4);
  os.write(h.data(), static_cast<std::streamsize>(h.size()));
  write_f32_blob(os, net.flat_params());
  write_f32_blob(os, net.flat_momenta());
  if (!os) throw data_error("save_checkpoint: write failure on " + path);
}

std::pair<Network, Checkpoint> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("load_checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCkptMagic, 4) != 0)
    throw data_error("load_checkpoint: bad magic in " + path);
  if (is.get() != kCkptVersion)
    throw data_error("load_checkpoint: unsupported version");
  std::uint32_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 4);
  std::string h(hlen, '\0');
  is.read(h.data(), hlen);
  if (!is) throw data_error("load_checkpoint: truncated header");

  Checkpoint meta;
  std::vector<LayerSpec> arch;
  int in_h, in_w, in_c;
  std::uint64_t seed;
  try {
    const nlohmann::json hdr = nlohmann::json::parse(h);
    meta.kind = hdr.at("kind") == "direct" ? SampleKind::direct
                                           : SampleKind::cascaded;
    meta.M = hdr.at("M").get<int>();
    meta.L = hdr.at("L").get<int>();
    in_h = hdr.at("in_h").get<int>();
    in_w = hdr.at("in_w").get<int>();
    in_c = hdr.at("in_c").get<int>();
    seed = hdr.at("seed").get<std::uint64_t>();
    for (const auto& j : hdr.at("arch")) arch.push_back(LayerSpec::from_json(j));
    meta.norm.mean = hdr.at("norm").at("mean").get<std::array<double, 3>>();
    meta.norm.stddev = hdr.at("norm").at("stddev").get<std::array<double, 3>>();
    for (const auto& j : hdr.at("log"))
      meta.log.push_back({j.at("epoch").get<int>(),
                          j.at("train_mse").get<double>(),
                          j.at("val_mse").get<double>(),
                          j.at("val_nmse").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("load_checkpoint: malformed header: ") +
                     e.what());
  }

  Network net(in_h, in_w, in_c, arch, seed);
  const Eigen::Index np = net.flat_params().size();
  const Eigen::Index nm = net.flat_momenta().size();
  net.set_flat_params(read_f32_blob(is, np));
  net.set_flat_momenta(read_f32_blob(is, nm));
  if (!is) throw data_error("load_checkpoint: truncated parameter blob");
  net.log = meta.log;
  return {std::move(net), std::move(meta)};
}

Eigen::VectorXcd predict_direct(Network& net, const Eigen::RowVectorXcd& y,
                                const NormStats& norm, int M) {
  Rng rng(0);
  const Eigen::VectorXd x = normalize_input(build_input_direct(y, M), norm);
  const Eigen::MatrixXd z = net.forward(x, false, rng);
  if (z.rows() != 2 * M) throw data_error("predict_direct: output size mismatch");
  Eigen::VectorXcd h(M);
  for (int i = 0; i < M; ++i) h(i) = cplx(z(i, 0), z(M + i, 0));
  return h;
}

Eigen::MatrixXcd predict_cascaded(Network& net,
                                  const std::vector<Eigen::RowVectorXcd>& y_cols,
                                  const NormStats& norm, int M, int L) {
  Rng rng(0);
  const Eigen::VectorXd x =
      normalize_input(build_input_cascaded(y_cols), norm);
  const Eigen::MatrixXd z = net.forward(x, false, rng);
  if (z.rows() != 2 * M * L)
    throw data_error("predict_cascaded: output size mismatch");
  const Eigen::Index n = static_cast<Eigen::Index>(M) * L;
  Eigen::MatrixXcd G(M, L);
  for (Eigen::Index i = 0; i < n; ++i) G(i) = cplx(z(i, 0), z(n + i, 0));
  return G;
}

ChannelEstimate predict_channel(Network& net_direct, Network& net_cascaded,
                                const Eigen::RowVectorXcd& y_direct,
                                const std::vector<Eigen::RowVectorXcd>& y_cols,
                                const NormStats& norm_direct,
                                const NormStats& norm_cascaded, int M, int L) {
  ChannelEstimate est;
  est.method = EstimationMethod::channelnet;
  est.h_direct = predict_direct(net_direct, y_direct, norm_direct, M);
  est.G = predict_cascaded(net_cascaded, y_cols, norm_cascaded, M, L);
  return est;
}

}  // namespace lischan
