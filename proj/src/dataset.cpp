// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

#include "errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "dataset serialization assumes a little-endian host");

namespace lischan {

namespace {

nlohmann::json snr_to_json(double v) {
  if (v == kInfDb) return "inf";
  return v;
}

double snr_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfDb;
    throw config_error("gen: unrecognized SNR string, expected \"inf\"");
  }
  if (j.is_null()) return kInfDb;
  return j.get<double>();
}

// Largest divisor of n not exceeding sqrt(n); the square root itself when n
// is a perfect square.
int fold_rows(int n) {
  int best = 1;
  for (int r = 1; r * r <= n; ++r)
    if (n % r == 0) best = r;
  return best;
}

InputTensor fold_three_channel(const Eigen::RowVectorXcd& y, int rows,
                               int cols) {
  InputTensor t;
  t.h = rows;
  t.w = cols;
  t.c = 3;
  t.data.resize(static_cast<std::size_t>(3) * rows * cols);
  const int plane = rows * cols;
  for (int idx = 0; idx < plane; ++idx) {
    const cplx v = y(idx);  // column-major refold: idx = col*rows + row
    t.data[idx] = static_cast<float>(v.real());
    t.data[plane + idx] = static_cast<float>(v.imag());
    t.data[2 * plane + idx] = static_cast<float>(std::abs(v));
  }
  return t;
}

void run_chunks(int n, int threads, const std::function<void(int, int)>& fn) {
  if (threads <= 1 || n <= 1) {
    fn(0, n);
    return;
  }
  const int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

nlohmann::json GenParams::to_json() const {
  nlohmann::json train = nlohmann::json::array();
  for (double v : train_snr_db) train.push_back(snr_to_json(v));
  nlohmann::json label = nlohmann::json::array();
  for (double v : label_snr_db) label.push_back(snr_to_json(v));
  return nlohmann::json{{"U", U},
                        {"V", V},
                        {"train_snr_db", train},
                        {"label_snr_db", label},
                        {"train_fraction", train_fraction},
                        {"approach", approach},
                        {"snr_log_scale", snr_log_scale}};
}

GenParams GenParams::from_json(const nlohmann::json& j) {
  GenParams g;
  try {
    g.U = j.at("U").get<int>();
    g.V = j.at("V").get<int>();
    g.train_snr_db.clear();
    for (const auto& v : j.at("train_snr_db")) g.train_snr_db.push_back(snr_from_json(v));
    g.label_snr_db.clear();
    if (j.contains("label_snr_db"))
      for (const auto& v : j["label_snr_db"]) g.label_snr_db.push_back(snr_from_json(v));
    else
      g.label_snr_db = {kInfDb};
    g.train_fraction = j.value("train_fraction", 0.7);
    g.approach = j.value("approach", 1);
    g.snr_log_scale = j.value("snr_log_scale", 20.0);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("gen: malformed JSON: ") + e.what());
  }
  if (g.U < 1 || g.V < 1) throw config_error("gen: U, V must be >= 1");
  if (g.train_snr_db.empty() || g.label_snr_db.empty())
    throw config_error("gen: SNR lists must be nonempty");
  if (!(g.train_fraction > 0.0 && g.train_fraction < 1.0))
    throw config_error("gen: train_fraction must be in (0, 1)");
  if (g.approach != 1 && g.approach != 2)
    throw config_error("gen: approach must be 1 or 2");
  return g;
}

Eigen::MatrixXcd noisy_label(const Eigen::MatrixXcd& entries, double snr_db,
                             Rng& rng, double log_scale) {
  if (snr_db == kInfDb) return entries;
  Eigen::MatrixXcd out = entries;
  const double scale = std::pow(10.0, -snr_db / log_scale);
  for (Eigen::Index c = 0; c < out.cols(); ++c)
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      const double var = std::norm(out(r, c)) * scale;  // per-entry sigma^2
      if (var > 0.0) out(r, c) += rng.cgaussian(var);
    }
  return out;
}

InputTensor build_input_direct(const Eigen::RowVectorXcd& y_direct, int M) {
  if (y_direct.size() != M)
    throw data_error("build_input_direct: expected P = M received symbols");
  const int rows = fold_rows(M);
  return fold_three_channel(y_direct, rows, M / rows);
}

InputTensor build_input_cascaded(
    const std::vector<Eigen::RowVectorXcd>& y_cols) {
  if (y_cols.empty()) throw data_error("build_input_cascaded: no rows");
  const int L = static_cast<int>(y_cols.size());
  const int M = static_cast<int>(y_cols[0].size());
  Eigen::RowVectorXcd stacked(static_cast<Eigen::Index>(L) * M);
  for (int l = 0; l < L; ++l) {
    if (y_cols[l].size() != M)
      throw data_error("build_input_cascaded: inconsistent row lengths");
    stacked.segment(static_cast<Eigen::Index>(l) * M, M) = y_cols[l];
  }
  return fold_three_channel(stacked, L, M);
}

std::vector<float> build_label_direct(const Eigen::VectorXcd& h) {
  const Eigen::Index M = h.size();
  std::vector<float> z(2 * M);
  for (Eigen::Index i = 0; i < M; ++i) {
    z[i] = static_cast<float>(h(i).real());
    z[M + i] = static_cast<float>(h(i).imag());
  }
  return z;
}

std::vector<float> build_label_cascaded(const Eigen::MatrixXcd& G) {
  const Eigen::Index n = G.size();
  std::vector<float> z(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {  // column-major vec
    z[i] = static_cast<float>(G(i).real());
    z[n + i] = static_cast<float>(G(i).imag());
  }
  return z;
}

Eigen::VectorXcd label_to_direct(const std::vector<float>& z) {
  const std::size_t M = z.size() / 2;
  Eigen::VectorXcd h(M);
  for (std::size_t i = 0; i < M; ++i) h(i) = cplx(z[i], z[M + i]);
  return h;
}

Eigen::MatrixXcd label_to_cascaded(const std::vector<float>& z, int M, int L) {
  if (z.size() != static_cast<std::size_t>(2) * M * L)
    throw data_error("label_to_cascaded: length mismatch");
  const std::size_t n = static_cast<std::size_t>(M) * L;
  Eigen::MatrixXcd G(M, L);
  for (std::size_t i = 0; i < n; ++i)
    G(static_cast<Eigen::Index>(i)) = cplx(z[i], z[n + i]);
  return G;
}

std::pair<Dataset, Dataset> generate(const ScenarioConfig& config,
                                     const GenParams& gen, int threads) {
  config.validate();
  if (config.P != config.M)
    throw config_error("generate: network inputs require P = M");

  const PilotMatrix pilots = make_pilots(config.M, config.P, config.L);
  const int combos =
      static_cast<int>(gen.train_snr_db.size() * gen.label_snr_db.size());
  const std::size_t per_block = static_cast<std::size_t>(gen.U) * config.K;
  const int blocks = combos * gen.V;
  const std::size_t total = per_block * blocks;

  Dataset dc, cc;
  dc.kind = SampleKind::direct;
  cc.kind = SampleKind::cascaded;
  dc.config = cc.config = config;
  dc.gen = cc.gen = gen;
  dc.samples.resize(total);
  cc.samples.resize(total);

  // Blocks (combo, v) are independent; each owns a generator derived from
  // (seed, combo, v) so the result is identical at any thread count.
  run_chunks(blocks, threads, [&](int lo, int hi) {
    for (int b = lo; b < hi; ++b) {
      const int ci = b / gen.V;
      const int v = b % gen.V;
      const double train_snr = gen.train_snr_db[ci / gen.label_snr_db.size()];
      const double label_snr = gen.label_snr_db[ci % gen.label_snr_db.size()];
      const double noise_var = noise_power_from_snr_db(train_snr);

      Rng rng(derive_seed(config.seed, 0xda7a5e7, static_cast<std::uint64_t>(ci),
                          static_cast<std::uint64_t>(v)));
      const ChannelRealization ch = draw_channels(config, rng);

      std::size_t t = static_cast<std::size_t>(b) * per_block;
      for (int u = 0; u < gen.U; ++u) {
        // Noisy-label copy of the channels, used both for the received
        // pilots and for the labels.
        ChannelRealization chu = ch;
        for (int k = 0; k < config.K; ++k) {
          chu.h_direct[k] =
              noisy_label(ch.h_direct[k], label_snr, rng, gen.snr_log_scale);
          chu.G_cascaded[k] =
              noisy_label(ch.G_cascaded[k], label_snr, rng, gen.snr_log_scale);
        }

        const Eigen::MatrixXcd y_d =
            phase1_receive(chu, lis_all_off(config.L), pilots, noise_var, rng);

        std::vector<Eigen::MatrixXcd> y_c;  // per element, K x P
        Eigen::MatrixXcd y_joint;
        if (gen.approach == 1) {
          y_c.reserve(config.L);
          for (int l = 0; l < config.L; ++l)
            y_c.push_back(phase2_element_receive(chu, l, pilots, noise_var,
                                                 0.0, 0.0, rng));
        } else {
          y_joint = phase2_joint_receive(chu, pilots, noise_var, 0.0, rng);
        }

        for (int k = 0; k < config.K; ++k, ++t) {
          SampleMeta meta{k, u, v, train_snr, label_snr};

          Sample& sd = dc.samples[t];
          sd.kind = SampleKind::direct;
          sd.meta = meta;
          sd.input = build_input_direct(y_d.row(k), config.M);
          sd.label = build_label_direct(chu.h_direct[k]);

          Sample& sc = cc.samples[t];
          sc.kind = SampleKind::cascaded;
          sc.meta = meta;
          if (gen.approach == 1) {
            std::vector<Eigen::RowVectorXcd> rows(config.L);
            for (int l = 0; l < config.L; ++l) rows[l] = y_c[l].row(k);
            sc.input = build_input_cascaded(rows);
          } else {
            std::vector<Eigen::RowVectorXcd> rows(config.L);
            for (int l = 0; l < config.L; ++l)
              rows[l] = y_joint.row(k).segment(
                  static_cast<Eigen::Index>(l) * config.M, config.M);
            sc.input = build_input_cascaded(rows);
          }
          sc.label = build_label_cascaded(chu.G_cascaded[k]);
        }
      }
    }
  });

  for (Dataset* ds : {&dc, &cc}) {
    ds->in_h = ds->samples[0].input.h;
    ds->in_w = ds->samples[0].input.w;
    ds->in_c = 3;
    ds->label_len = static_cast<int>(ds->samples[0].label.size());

    Rng shuffle_rng(derive_seed(config.seed, 0x5f0f,
                                ds->kind == SampleKind::direct ? 0 : 1));
    for (std::size_t i = ds->samples.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.uniform() * i);
      std::swap(ds->samples[i - 1], ds->samples[j]);
    }
    ds->train_count = static_cast<std::size_t>(
        std::floor(ds->samples.size() * gen.train_fraction));
    if (ds->train_count == 0 || ds->train_count == ds->samples.size())
      throw config_error("generate: empty train or validation partition");
    ds->norm = compute_norm_stats(*ds, ds->train_count);
  }
  return {std::move(dc), std::move(cc)};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction,
                                  Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw config_error("split: fraction must be in (0, 1)");
  const std::size_t T = ds.samples.size();
  const std::size_t n_train =
      static_cast<std::size_t>(std::floor(T * train_fraction));
  if (n_train == 0 || n_train == T)
    throw config_error("split: empty partition");

  std::vector<std::size_t> idx(T);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = T; i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform() * i)]);

  Dataset train = ds, val = ds;
  train.samples.clear();
  val.samples.clear();
  for (std::size_t i = 0; i < T; ++i)
    (i < n_train ? train : val).samples.push_back(ds.samples[idx[i]]);
  train.train_count = train.samples.size();
  val.train_count = 0;
  return {std::move(train), std::move(val)};
}

NormStats compute_norm_stats(const Dataset& ds, std::size_t train_count) {
  NormStats norm;
  const std::size_t plane =
      static_cast<std::size_t>(ds.in_h) * ds.in_w;
  for (int c = 0; c < 3; ++c) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < train_count; ++s) {
      const float* p = ds.samples[s].input.data.data() + c * plane;
      for (std::size_t i = 0; i < plane; ++i, ++n) {
        sum += p[i];
        sq += static_cast<double>(p[i]) * p[i];
      }
    }
    const double mean = n ? sum / n : 0.0;
    const double var = n ? std::max(sq / n - mean * mean, 0.0) : 1.0;
    norm.mean[c] = mean;
    norm.stddev[c] = std::max(std::sqrt(var), 1e-12);
  }
  return norm;
}

namespace {

constexpr char kMagic[4] = {'L', 'C', 'D', 'S'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data_error("save_dataset: cannot open " + path);

  nlohmann::json hdr{
      {"kind", ds.kind == SampleKind::direct ? "direct" : "cascaded"},
      {"in_h", ds.in_h},
      {"in_w", ds.in_w},
      {"in_c", ds.in_c},
      {"label_len", ds.label_len},
      {"count", ds.samples.size()},
      {"train_count", ds.train_count},
      {"scenario", ds.config.to_json()},
      {"gen", ds.gen.to_json()},
      {"norm",
       {{"mean", ds.norm.mean}, {"stddev", ds.norm.stddev}}}};
  const std::string h = hdr.dump();

  os.write(kMagic, 4);
  os.put(static_cast<char>(kVersion));
  put_u32(os, static_cast<std::uint32_t>(h.size()));
  os.write(h.data(), static_cast<std::streamsize>(h.size()));

  for (const Sample& s : ds.samples) {
    os.write(reinterpret_cast<const char*>(s.input.data.data()),
             static_cast<std::streamsize>(s.input.data.size() * 4));
    os.write(reinterpret_cast<const char*>(s.label.data()),
             static_cast<std::streamsize>(s.label.size() * 4));
    const std::uint32_t kuv[3] = {static_cast<std::uint32_t>(s.meta.user),
                                  static_cast<std::uint32_t>(s.meta.u),
                                  static_cast<std::uint32_t>(s.meta.v)};
    os.write(reinterpret_cast<const char*>(kuv), 12);
    const float snrs[2] = {static_cast<float>(s.meta.snr_db),
                           static_cast<float>(s.meta.label_snr_db)};
    os.write(reinterpret_cast<const char*>(snrs), 8);
  }
  if (!os) throw data_error("save_dataset: write failure on " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data_error("load_dataset: cannot open " + path);

  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error("load_dataset: bad magic at offset 0 in " + path);
  const int version = is.get();
  if (version != kVersion)
    throw data_error("load_dataset: unsupported version at offset 4");
  const std::uint32_t hlen = get_u32(is);
  std::string h(hlen, '\0');
  is.read(h.data(), hlen);
  if (!is) throw data_error("load_dataset: truncated header");

  Dataset ds;
  nlohmann::json hdr;
  try {
    hdr = nlohmann::json::parse(h);
    ds.kind = hdr.at("kind") == "direct" ? SampleKind::direct
                                         : SampleKind::cascaded;
    ds.in_h = hdr.at("in_h").get<int>();
    ds.in_w = hdr.at("in_w").get<int>();
    ds.in_c = hdr.at("in_c").get<int>();
    ds.label_len = hdr.at("label_len").get<int>();
    ds.train_count = hdr.at("train_count").get<std::size_t>();
    ds.config = ScenarioConfig::from_json(hdr.at("scenario"));
    ds.gen = GenParams::from_json(hdr.at("gen"));
    ds.norm.mean = hdr.at("norm").at("mean").get<std::array<double, 3>>();
    ds.norm.stddev = hdr.at("norm").at("stddev").get<std::array<double, 3>>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("load_dataset: malformed header: ") + e.what());
  }

  const std::size_t count = hdr.at("count").get<std::size_t>();
  const std::size_t in_n =
      static_cast<std::size_t>(ds.in_h) * ds.in_w * ds.in_c;
  ds.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    Sample& s = ds.samples[i];
    s.kind = ds.kind;
    s.input.h = ds.in_h;
    s.input.w = ds.in_w;
    s.input.c = ds.in_c;
    s.input.data.resize(in_n);
    s.label.resize(ds.label_len);
    is.read(reinterpret_cast<char*>(s.input.data.data()),
            static_cast<std::streamsize>(in_n * 4));
    is.read(reinterpret_cast<char*>(s.label.data()),
            static_cast<std::streamsize>(s.label.size() * 4));
    std::uint32_t kuv[3];
    float snrs[2];
    is.read(reinterpret_cast<char*>(kuv), 12);
    is.read(reinterpret_cast<char*>(snrs), 8);
    if (!is)
      throw data_error("load_dataset: truncated at sample " +
                       std::to_string(i) + " (offset " +
                       std::to_string(is.tellg()) + ")");
    s.meta = {static_cast<int>(kuv[0]), static_cast<int>(kuv[1]),
              static_cast<int>(kuv[2]), snrs[0], snrs[1]};
  }
  return ds;
}

Eigen::VectorXd normalize_input(const InputTensor& in, const NormStats& norm) {
  const std::size_t plane = static_cast<std::size_t>(in.h) * in.w;
  Eigen::VectorXd x(static_cast<Eigen::Index>(in.data.size()));
  for (int c = 0; c < in.c; ++c)
    for (std::size_t i = 0; i < plane; ++i)
      x(static_cast<Eigen::Index>(c * plane + i)) =
          (in.data[c * plane + i] - norm.mean[c]) / norm.stddev[c];
  return x;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> to_matrices(const Dataset& ds,
                                                        std::size_t begin,
                                                        std::size_t count) {
  const Eigen::Index in_n =
      static_cast<Eigen::Index>(ds.in_h) * ds.in_w * ds.in_c;
  Eigen::MatrixXd in(in_n, count), out(ds.label_len, count);
  for (std::size_t i = 0; i < count; ++i) {
    const Sample& s = ds.samples[begin + i];
    in.col(static_cast<Eigen::Index>(i)) = normalize_input(s.input, ds.norm);
    for (int j = 0; j < ds.label_len; ++j)
      out(j, static_cast<Eigen::Index>(i)) = s.label[j];
  }
  return {std::move(in), std::move(out)};
}

}  // namespace lischan
