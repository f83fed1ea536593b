// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <thread>

#include "errors.hpp"

namespace lischan {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

void parallel_chunks(int n, int threads, const std::function<void(int, int)>& fn) {
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

double ratio(const Eigen::MatrixXcd& truth, const Eigen::MatrixXcd& est,
             bool squared) {
  const double d = squared ? truth.squaredNorm() : truth.norm();
  const double e = squared ? (est - truth).squaredNorm() : (est - truth).norm();
  return e / d;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

const char* sweep_kind_name(SweepKind k) {
  switch (k) {
    case SweepKind::snr: return "snr";
    case SweepKind::pilot_snr: return "pilot_snr";
    case SweepKind::angle_mismatch: return "angle_mismatch";
    case SweepKind::epsilon: return "epsilon";
  }
  return "?";
}

SweepKind sweep_kind_from_name(const std::string& s) {
  if (s == "snr") return SweepKind::snr;
  if (s == "pilot_snr") return SweepKind::pilot_snr;
  if (s == "angle_mismatch") return SweepKind::angle_mismatch;
  if (s == "epsilon") return SweepKind::epsilon;
  throw config_error("sweep: unknown kind " + s);
}

void SweepSpec::validate() const {
  if (grid.empty()) throw config_error("sweep: empty grid");
  if (trials < 1) throw config_error("sweep: trials >= 1");
  if (estimators.empty()) throw config_error("sweep: no estimators");
  if (fixed_snr_db.empty()) throw config_error("sweep: empty fixed_snr_db");
  for (const auto& e : estimators)
    if (e != "ls" && e != "ls-joint" && e != "channelnet")
      throw config_error("sweep: unknown estimator " + e);
}

nlohmann::json SweepSpec::to_json() const {
  auto enc = [](double v) -> nlohmann::json {
    if (v == kInfDb) return "inf";
    return v;
  };
  nlohmann::json snrs = nlohmann::json::array();
  for (double s : fixed_snr_db) snrs.push_back(enc(s));
  return {{"kind", sweep_kind_name(kind)},
          {"grid", grid},
          {"trials", trials},
          {"fixed_snr_db", snrs},
          {"fixed_pilot_snr_db", enc(fixed_pilot_snr_db)},
          {"fixed_eps", fixed_eps},
          {"estimators", estimators},
          {"seed", seed},
          {"squared", squared},
          {"fresh_channel_per_trial", fresh_channel_per_trial},
          {"snr_log_scale", snr_log_scale}};
}

SweepSpec SweepSpec::from_json(const nlohmann::json& j) {
  auto dec = [](const nlohmann::json& v) -> double {
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return kInfDb;
      throw config_error("sweep: bad dB value " + s);
    }
    return v.get<double>();
  };
  SweepSpec s;
  try {
    s.kind = sweep_kind_from_name(j.at("kind").get<std::string>());
    s.grid = j.at("grid").get<std::vector<double>>();
    s.trials = j.value("trials", s.trials);
    if (j.contains("fixed_snr_db")) {
      s.fixed_snr_db.clear();
      if (j["fixed_snr_db"].is_array())
        for (const auto& v : j["fixed_snr_db"]) s.fixed_snr_db.push_back(dec(v));
      else
        s.fixed_snr_db.push_back(dec(j["fixed_snr_db"]));
    }
    if (j.contains("fixed_pilot_snr_db"))
      s.fixed_pilot_snr_db = dec(j["fixed_pilot_snr_db"]);
    s.fixed_eps = j.value("fixed_eps", s.fixed_eps);
    if (j.contains("estimators"))
      s.estimators = j["estimators"].get<std::vector<std::string>>();
    s.seed = j.value("seed", s.seed);
    s.squared = j.value("squared", s.squared);
    s.fresh_channel_per_trial =
        j.value("fresh_channel_per_trial", s.fresh_channel_per_trial);
    s.snr_log_scale = j.value("snr_log_scale", s.snr_log_scale);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("sweep: malformed JSON: ") + e.what());
  }
  s.validate();
  return s;
}

SweepSpec SweepSpec::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("sweep: cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("sweep: cannot parse " + path + ": " + e.what());
  }
  if (j.contains("sweep")) j = j["sweep"];
  return from_json(j);
}

double nmse(const Eigen::MatrixXcd& truth,
            const std::vector<Eigen::MatrixXcd>& estimates, bool squared) {
  if (estimates.empty()) throw data_error("nmse: no trials");
  if (!(truth.norm() > 0.0)) throw data_error("nmse: zero-norm truth");
  double acc = 0.0;
  for (const auto& e : estimates) {
    if (e.rows() != truth.rows() || e.cols() != truth.cols())
      throw data_error("nmse: estimate shape mismatch");
    acc += ratio(truth, e, squared);
  }
  return acc / static_cast<double>(estimates.size());
}

SweepResult run_sweep(const SweepSpec& spec, const ScenarioConfig& scenario,
                      const TrainedNets* nets, int threads) {
  spec.validate();
  scenario.validate();
  const bool wants_net =
      std::count(spec.estimators.begin(), spec.estimators.end(), "channelnet");
  if (wants_net &&
      (!nets || !nets->net_direct || !nets->net_cascaded))
    throw config_error("run_sweep: channelnet estimator needs trained nets");

  const auto t0 = std::chrono::steady_clock::now();
  const int M = scenario.M, L = scenario.L, K = scenario.K;
  const int E = static_cast<int>(spec.estimators.size());
  const int J = spec.trials;
  const PilotMatrix clean = make_pilots(M, scenario.P, L);

  SweepResult res;
  res.spec = spec;
  res.scenario = scenario;

  for (std::size_t gi = 0; gi < spec.grid.size(); ++gi) {
    const double g = spec.grid[gi];

    ChannelRealization shared;
    if (!spec.fresh_channel_per_trial) {
      Rng ch_rng(derive_seed(spec.seed, 0xc4a1, gi));
      shared = draw_channels(scenario, ch_rng);
    }

    // ratios[(e*J + j)*K*2 ...]: slot-indexed so the reduction is
    // order-independent and identical at any thread count.
    std::vector<double> ratios(static_cast<std::size_t>(E) * J * K * 2, 0.0);

    parallel_chunks(J, threads, [&](int lo, int hi) {
      for (int j = lo; j < hi; ++j) {
        Rng rng(derive_seed(spec.seed, 0x791a1, gi, static_cast<std::uint64_t>(j)));

        ChannelRealization nominal =
            spec.fresh_channel_per_trial ? draw_channels(scenario, rng) : shared;

        const double snr_db =
            spec.kind == SweepKind::snr
                ? g
                : spec.fixed_snr_db[static_cast<std::size_t>(j) %
                                    spec.fixed_snr_db.size()];
        const double pilot_snr_db =
            spec.kind == SweepKind::pilot_snr ? g : spec.fixed_pilot_snr_db;
        const double eps = spec.kind == SweepKind::epsilon ? g : spec.fixed_eps;
        const double noise_var = noise_power_from_snr_db(snr_db);

        // Transmit channel: the nominal one except under angle mismatch,
        // where pilots see the perturbed channel but scoring does not.
        ChannelRealization tx = nominal;
        if (spec.kind == SweepKind::angle_mismatch && g != 0.0)
          tx = assemble_channels(
              scenario, perturb_angles(nominal.paths, g * kDegToRad, rng));

        const PilotMatrix sent =
            corrupt_pilots(clean, pilot_snr_db, rng, spec.snr_log_scale);

        const Eigen::MatrixXcd y1 = phase1_receive(
            tx, lis_all_off(L, eps, eps), sent, noise_var, rng);
        std::vector<Eigen::MatrixXcd> y_elem(L);
        for (int l = 0; l < L; ++l)
          y_elem[l] = phase2_element_receive(tx, l, sent, noise_var, eps, eps,
                                             rng);
        const Eigen::MatrixXcd y_joint =
            phase2_joint_receive(tx, sent, noise_var, eps, rng);

        for (int e = 0; e < E; ++e) {
          const std::string& est = spec.estimators[static_cast<std::size_t>(e)];
          for (int k = 0; k < K; ++k) {
            Eigen::VectorXcd h_hat;
            Eigen::MatrixXcd G_hat;
            std::vector<Eigen::RowVectorXcd> rows(L);
            for (int l = 0; l < L; ++l) rows[l] = y_elem[l].row(k);
            if (est == "ls") {
              h_hat = ls_direct(y1.row(k), clean.X);
              G_hat = ls_cascaded_per_column(rows, clean.X, h_hat);
            } else if (est == "ls-joint") {
              h_hat = ls_direct(y1.row(k), clean.X);
              G_hat = ls_cascaded_joint(y_joint.row(k), clean.X_bar, h_hat);
            } else {
              h_hat = predict_direct(*nets->net_direct, y1.row(k),
                                     nets->norm_direct, M);
              G_hat = predict_cascaded(*nets->net_cascaded, rows,
                                       nets->norm_cascaded, M, L);
            }
            const std::size_t at =
                ((static_cast<std::size_t>(e) * J + j) * K + k) * 2;
            ratios[at] = ratio(nominal.h_direct[k], h_hat, spec.squared);
            ratios[at + 1] = ratio(nominal.G_cascaded[k], G_hat, spec.squared);
          }
        }
      }
    });

    for (int e = 0; e < E; ++e) {
      SweepCell cell;
      cell.grid_value = g;
      cell.estimator = spec.estimators[static_cast<std::size_t>(e)];
      cell.nmse_direct_user.assign(K, 0.0);
      cell.nmse_cascaded_user.assign(K, 0.0);
      for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) {
          const std::size_t at =
              ((static_cast<std::size_t>(e) * J + j) * K + k) * 2;
          cell.nmse_direct_user[k] += ratios[at];
          cell.nmse_cascaded_user[k] += ratios[at + 1];
        }
      for (int k = 0; k < K; ++k) {
        cell.nmse_direct_user[k] /= J;
        cell.nmse_cascaded_user[k] /= J;
        cell.nmse_direct += cell.nmse_direct_user[k];
        cell.nmse_cascaded += cell.nmse_cascaded_user[k];
      }
      cell.nmse_direct /= K;
      cell.nmse_cascaded /= K;
      res.cells.push_back(std::move(cell));
    }
  }

  res.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return res;
}

namespace {

nlohmann::json cell_to_json(const SweepCell& c) {
  return {{"grid_value", c.grid_value},
          {"estimator", c.estimator},
          {"nmse_direct", c.nmse_direct},
          {"nmse_cascaded", c.nmse_cascaded},
          {"nmse_direct_user", c.nmse_direct_user},
          {"nmse_cascaded_user", c.nmse_cascaded_user}};
}

SweepCell cell_from_json(const nlohmann::json& j) {
  SweepCell c;
  c.grid_value = j.at("grid_value").get<double>();
  c.estimator = j.at("estimator").get<std::string>();
  c.nmse_direct = j.at("nmse_direct").get<double>();
  c.nmse_cascaded = j.at("nmse_cascaded").get<double>();
  c.nmse_direct_user = j.at("nmse_direct_user").get<std::vector<double>>();
  c.nmse_cascaded_user = j.at("nmse_cascaded_user").get<std::vector<double>>();
  return c;
}

}  // namespace

std::string config_hash(const SweepSpec& spec, const ScenarioConfig& scenario) {
  const std::string s = spec.to_json().dump() + scenario.to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void emit(const SweepResult& result, const std::string& path_prefix) {
  const int K = result.scenario.K;

  std::ofstream csv(path_prefix + ".csv");
  if (!csv) throw data_error("emit: cannot open " + path_prefix + ".csv");
  csv << "grid_value,estimator,target,nmse,nmse_db,J";
  for (int k = 0; k < K; ++k) csv << ",user_" << k;
  csv << "\n";
  for (const auto& c : result.cells) {
    for (int target = 0; target < 2; ++target) {
      const double v = target == 0 ? c.nmse_direct : c.nmse_cascaded;
      const auto& per_user =
          target == 0 ? c.nmse_direct_user : c.nmse_cascaded_user;
      csv << fmt_double(c.grid_value) << ',' << c.estimator << ','
          << (target == 0 ? "direct" : "cascaded") << ',' << fmt_double(v)
          << ',' << fmt_double(10.0 * std::log10(v)) << ','
          << result.spec.trials;
      for (int k = 0; k < K; ++k) csv << ',' << fmt_double(per_user[k]);
      csv << "\n";
    }
  }
  if (!csv) throw data_error("emit: write failure on " + path_prefix + ".csv");

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) cells.push_back(cell_to_json(c));
  const nlohmann::json j{{"version", "1.0.0"},
                         {"config_hash", config_hash(result.spec, result.scenario)},
                         {"spec", result.spec.to_json()},
                         {"scenario", result.scenario.to_json()},
                         {"cells", cells}};
  std::ofstream js(path_prefix + ".json");
  if (!js) throw data_error("emit: cannot open " + path_prefix + ".json");
  js << j.dump(2) << "\n";
  if (!js) throw data_error("emit: write failure on " + path_prefix + ".json");
}

SweepResult load_sweep_result(const std::string& json_path) {
  std::ifstream is(json_path);
  if (!is) throw data_error("load_sweep_result: cannot open " + json_path);
  nlohmann::json j;
  try {
    is >> j;
    SweepResult r;
    r.spec = SweepSpec::from_json(j.at("spec"));
    r.scenario = ScenarioConfig::from_json(j.at("scenario"));
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(std::string("load_sweep_result: malformed JSON: ") +
                     e.what());
  }
}

std::string default_basename(const SweepSpec& spec,
                             const ScenarioConfig& scenario) {
  const std::time_t now = std::time(nullptr);
  char ts[32];
  std::strftime(ts, sizeof(ts), "%Y%m%dT%H%M%SZ", std::gmtime(&now));
  return std::string(sweep_kind_name(spec.kind)) + "_" + ts + "_" +
         config_hash(spec, scenario);
}

}  // namespace lischan
