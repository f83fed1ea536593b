// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "errors.hpp"

namespace fs = std::filesystem;

namespace lischan {

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config " + path);
  try {
    nlohmann::json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("cannot parse " + path + ": " + e.what());
  }
}

std::string resolve_path(const std::string& config_path,
                         const std::string& maybe_relative) {
  const fs::path p(maybe_relative);
  if (p.is_absolute()) return maybe_relative;
  return (fs::path(config_path).parent_path() / p).string();
}

// Manifest sits next to every artifact set; written to a temp file first so
// a crash never leaves a truncated manifest behind.
std::string write_manifest(const std::string& out_dir,
                           const std::string& subcommand,
                           const nlohmann::json& resolved_config,
                           const std::vector<std::string>& outputs,
                           std::uint64_t seed, double elapsed_seconds) {
  const std::time_t now = std::time(nullptr);
  char ts[32];
  std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  const nlohmann::json m{{"subcommand", subcommand},
                         {"config", resolved_config},
                         {"outputs", outputs},
                         {"seed", seed},
                         {"tool_version", kToolVersion},
                         {"elapsed_seconds", elapsed_seconds},
                         {"finished_at", ts}};
  const fs::path path = fs::path(out_dir) / (subcommand + "_manifest.json");
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw data_error("cannot write manifest " + tmp.string());
    os << m.dump(2) << "\n";
    if (!os) throw data_error("manifest write failure " + tmp.string());
  }
  fs::rename(tmp, path);
  return path.string();
}

void ensure_out_dir(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw data_error("cannot create output directory " + out_dir);
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

GenerateOutcome run_generate(const std::string& config_path,
                             const std::string& out_dir,
                             std::optional<std::uint64_t> seed_override,
                             int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const nlohmann::json j = load_json(config_path);
  ScenarioConfig scenario =
      ScenarioConfig::from_json(j.contains("scenario") ? j["scenario"] : j);
  GenParams gen = j.contains("gen") ? GenParams::from_json(j["gen"])
                                    : GenParams{};
  if (seed_override) scenario.seed = *seed_override;

  ensure_out_dir(out_dir);
  auto [dc, cc] = generate(scenario, gen, threads);

  GenerateOutcome out;
  out.samples_per_set = dc.samples.size();
  out.direct_path = (fs::path(out_dir) / "direct.ds").string();
  out.cascaded_path = (fs::path(out_dir) / "cascaded.ds").string();
  save_dataset(dc, out.direct_path);
  save_dataset(cc, out.cascaded_path);

  nlohmann::json resolved{{"scenario", scenario.to_json()},
                          {"gen", gen.to_json()}};
  out.manifest_path =
      write_manifest(out_dir, "generate", resolved,
                     {out.direct_path, out.cascaded_path}, scenario.seed,
                     seconds_since(t0));
  return out;
}

TrainOutcome run_train(const std::string& config_path,
                       const std::string& out_dir,
                       std::optional<std::uint64_t> seed_override) {
  const auto t0 = std::chrono::steady_clock::now();
  const nlohmann::json j = load_json(config_path);
  if (!j.contains("dataset"))
    throw config_error("train config: missing \"dataset\" path");
  const std::string ds_path =
      resolve_path(config_path, j["dataset"].get<std::string>());
  TrainConfig cfg = j.contains("train") ? TrainConfig::from_json(j["train"])
                                        : TrainConfig{};
  if (seed_override) cfg.seed = *seed_override;

  const Dataset ds = load_dataset(ds_path);
  const std::size_t n = ds.samples.size();
  if (ds.train_count == 0 || ds.train_count >= n)
    throw data_error("train: dataset has an empty partition");

  std::vector<LayerSpec> arch;
  if (j.contains("arch") && !j["arch"].is_string()) {
    const auto& a = j["arch"];
    try {
      arch = make_arch(a.at("conv_filters").get<std::vector<int>>(),
                       a.value("conv_size", 3),
                       a.at("fc_units").get<std::vector<int>>(),
                       a.value("dropout", 0.5), ds.label_len);
    } catch (const nlohmann::json::exception& e) {
      throw config_error(std::string("train config: malformed arch: ") +
                         e.what());
    }
  } else {
    arch = channelnet_arch(ds.label_len);
  }

  Network net(ds.in_h, ds.in_w, ds.in_c, arch, cfg.seed);
  auto [train_in, train_out] = to_matrices(ds, 0, ds.train_count);
  auto [val_in, val_out] = to_matrices(ds, ds.train_count, n - ds.train_count);
  const TrainResult tr = train(net, train_in, train_out, val_in, val_out, cfg);

  ensure_out_dir(out_dir);
  const std::string kind =
      ds.kind == SampleKind::direct ? "direct" : "cascaded";

  TrainOutcome out;
  out.epochs = static_cast<int>(tr.log.size());
  out.best_epoch = tr.best_epoch;
  out.best_val_mse = tr.best_val_mse;
  out.best_val_nmse = tr.log[static_cast<std::size_t>(tr.best_epoch - 1)].val_nmse;

  Checkpoint meta;
  meta.kind = ds.kind;
  meta.M = ds.config.M;
  meta.L = ds.config.L;
  meta.norm = ds.norm;
  meta.log = tr.log;
  out.checkpoint_path = (fs::path(out_dir) / (kind + ".ckpt")).string();
  save_checkpoint(net, meta, out.checkpoint_path);

  out.log_path = (fs::path(out_dir) / (kind + "_log.csv")).string();
  {
    std::ofstream os(out.log_path);
    if (!os) throw data_error("cannot write " + out.log_path);
    os << "epoch,train_mse,val_mse,val_nmse\n";
    char buf[160];
    for (const auto& e : tr.log) {
      std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g\n", e.epoch,
                    e.train_mse, e.val_mse, e.val_nmse);
      os << buf;
    }
  }

  nlohmann::json resolved{{"dataset", ds_path}, {"train", cfg.to_json()}};
  if (j.contains("arch")) resolved["arch"] = j["arch"];
  out.manifest_path =
      write_manifest(out_dir, "train", resolved,
                     {out.checkpoint_path, out.log_path}, cfg.seed,
                     seconds_since(t0));
  return out;
}

SweepOutcome run_sweep_job(const std::string& config_path,
                           const std::string& out_dir,
                           std::optional<std::uint64_t> seed_override,
                           int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  const nlohmann::json j = load_json(config_path);
  if (!j.contains("sweep") || !j.contains("scenario"))
    throw config_error("sweep config: needs \"sweep\" and \"scenario\"");
  SweepSpec spec = SweepSpec::from_json(j["sweep"]);
  const ScenarioConfig scenario = ScenarioConfig::from_json(j["scenario"]);
  if (seed_override) spec.seed = *seed_override;

  const bool wants_net =
      std::count(spec.estimators.begin(), spec.estimators.end(),
                 std::string("channelnet")) > 0;
  std::optional<std::pair<Network, Checkpoint>> ck_d, ck_c;
  TrainedNets nets;
  if (wants_net) {
    if (!j.contains("checkpoints"))
      throw config_error("sweep config: channelnet listed without checkpoints");
    const auto& c = j["checkpoints"];
    ck_d = load_checkpoint(
        resolve_path(config_path, c.at("direct").get<std::string>()));
    ck_c = load_checkpoint(
        resolve_path(config_path, c.at("cascaded").get<std::string>()));
    nets.net_direct = &ck_d->first;
    nets.net_cascaded = &ck_c->first;
    nets.norm_direct = ck_d->second.norm;
    nets.norm_cascaded = ck_c->second.norm;
  }

  const SweepResult result =
      run_sweep(spec, scenario, wants_net ? &nets : nullptr, threads);

  ensure_out_dir(out_dir);
  const std::string base = j.value("output_basename",
                                   default_basename(spec, scenario));
  const std::string prefix = (fs::path(out_dir) / base).string();
  emit(result, prefix);

  SweepOutcome out;
  out.csv_path = prefix + ".csv";
  out.json_path = prefix + ".json";
  nlohmann::json resolved{{"sweep", spec.to_json()},
                          {"scenario", scenario.to_json()}};
  if (j.contains("checkpoints")) resolved["checkpoints"] = j["checkpoints"];
  out.manifest_path =
      write_manifest(out_dir, "sweep", resolved, {out.csv_path, out.json_path},
                     spec.seed, seconds_since(t0));
  return out;
}

}  // namespace lischan
