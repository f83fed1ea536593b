// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Command-line driver.  Everything except the four flags lives in the JSON
// config so a run is reproducible from one file.  Exit codes: 0 success,
// 2 config error, 3 data error, 4 numerical failure.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lischan.h"

namespace {

struct CommonOpts {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_threads) {
  cmd->add_option("--config", o.config, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "seed override (replaces the config seed)")
      ->each([&o](const std::string&) { o.has_seed = true; });
  if (with_threads)
    cmd->add_option("--threads", o.threads, "worker thread cap")
        ->check(CLI::PositiveNumber);
}

int finish(int rc) {
  if (rc != LC_OK) std::fprintf(stderr, "error: %s\n", lc_last_error());
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LIS channel estimation pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(lc_version()));

  CommonOpts gen_o, train_o, sweep_o;
  CLI::App* gen = app.add_subcommand(
      "generate", "generate training datasets from a scenario config");
  add_common(gen, gen_o, true);
  CLI::App* train =
      app.add_subcommand("train", "train a network on a generated dataset");
  add_common(train, train_o, false);
  CLI::App* sweep =
      app.add_subcommand("sweep", "run a Monte Carlo sweep and emit results");
  add_common(sweep, sweep_o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LC_ERR_CONFIG;
  }

  if (gen->parsed()) {
    const uint64_t* s = gen_o.has_seed ? &gen_o.seed : nullptr;
    return finish(
        lc_generate(gen_o.config.c_str(), gen_o.out.c_str(), s, gen_o.threads));
  }
  if (train->parsed()) {
    const uint64_t* s = train_o.has_seed ? &train_o.seed : nullptr;
    return finish(lc_train(train_o.config.c_str(), train_o.out.c_str(), s));
  }
  const uint64_t* s = sweep_o.has_seed ? &sweep_o.seed : nullptr;
  return finish(
      lc_sweep(sweep_o.config.c_str(), sweep_o.out.c_str(), s, sweep_o.threads));
}
