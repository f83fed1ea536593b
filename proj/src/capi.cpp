// lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0

#include "lischan.h"

#include <cstring>
#include <functional>

#include "errors.hpp"
#include "runner.hpp"

namespace {

thread_local std::string g_last_error;

int guard(const std::function<void()>& fn) {
  try {
    fn();
    g_last_error.clear();
    return LC_OK;
  } catch (const lischan::config_error& e) {
    g_last_error = e.what();
    return LC_ERR_CONFIG;
  } catch (const lischan::data_error& e) {
    g_last_error = e.what();
    return LC_ERR_DATA;
  } catch (const lischan::numeric_error& e) {
    g_last_error = e.what();
    return LC_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return LC_ERR_CONFIG;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LC_ERR_DATA;
  }
}

std::optional<std::uint64_t> opt_seed(const uint64_t* p) {
  if (!p) return std::nullopt;
  return *p;
}

int require(const void* p, const char* what) {
  if (p) return LC_OK;
  g_last_error = std::string("null argument: ") + what;
  return LC_ERR_CONFIG;
}

}  // namespace

struct lc_result {
  lischan::SweepResult r;
};

struct lc_dataset {
  lischan::Dataset d;
};

extern "C" {

const char* lc_version(void) { return lischan::kToolVersion; }

const char* lc_last_error(void) { return g_last_error.c_str(); }

int lc_generate(const char* config_path, const char* out_dir,
                const uint64_t* seed_override, int threads) {
  if (int rc = require(config_path, "config_path")) return rc;
  if (int rc = require(out_dir, "out_dir")) return rc;
  return guard([&] {
    lischan::run_generate(config_path, out_dir, opt_seed(seed_override),
                          threads < 1 ? 1 : threads);
  });
}

int lc_train(const char* config_path, const char* out_dir,
             const uint64_t* seed_override) {
  if (int rc = require(config_path, "config_path")) return rc;
  if (int rc = require(out_dir, "out_dir")) return rc;
  return guard([&] {
    lischan::run_train(config_path, out_dir, opt_seed(seed_override));
  });
}

int lc_sweep(const char* config_path, const char* out_dir,
             const uint64_t* seed_override, int threads) {
  if (int rc = require(config_path, "config_path")) return rc;
  if (int rc = require(out_dir, "out_dir")) return rc;
  return guard([&] {
    lischan::run_sweep_job(config_path, out_dir, opt_seed(seed_override),
                           threads < 1 ? 1 : threads);
  });
}

int lc_result_open(const char* json_path, lc_result** out) {
  if (int rc = require(json_path, "json_path")) return rc;
  if (int rc = require(out, "out")) return rc;
  return guard([&] {
    auto* r = new lc_result{lischan::load_sweep_result(json_path)};
    *out = r;
  });
}

void lc_result_close(lc_result* r) { delete r; }

int lc_result_cell_count(const lc_result* r, size_t* out) {
  if (int rc = require(r, "result")) return rc;
  if (int rc = require(out, "out")) return rc;
  *out = r->r.cells.size();
  g_last_error.clear();
  return LC_OK;
}

int lc_result_cell(const lc_result* r, size_t idx, double* grid_value,
                   double* nmse_direct, double* nmse_cascaded) {
  if (int rc = require(r, "result")) return rc;
  if (idx >= r->r.cells.size()) {
    g_last_error = "cell index out of range";
    return LC_ERR_DATA;
  }
  const auto& c = r->r.cells[idx];
  if (grid_value) *grid_value = c.grid_value;
  if (nmse_direct) *nmse_direct = c.nmse_direct;
  if (nmse_cascaded) *nmse_cascaded = c.nmse_cascaded;
  g_last_error.clear();
  return LC_OK;
}

int lc_result_estimator(const lc_result* r, size_t idx, char* buf,
                        size_t buflen) {
  if (int rc = require(r, "result")) return rc;
  if (int rc = require(buf, "buf")) return rc;
  if (idx >= r->r.cells.size()) {
    g_last_error = "cell index out of range";
    return LC_ERR_DATA;
  }
  if (buflen == 0) {
    g_last_error = "zero-length buffer";
    return LC_ERR_CONFIG;
  }
  std::strncpy(buf, r->r.cells[idx].estimator.c_str(), buflen - 1);
  buf[buflen - 1] = '\0';
  g_last_error.clear();
  return LC_OK;
}

int lc_dataset_open(const char* path, lc_dataset** out) {
  if (int rc = require(path, "path")) return rc;
  if (int rc = require(out, "out")) return rc;
  return guard([&] {
    auto* d = new lc_dataset{lischan::load_dataset(path)};
    *out = d;
  });
}

void lc_dataset_close(lc_dataset* d) { delete d; }

int lc_dataset_info(const lc_dataset* d, size_t* samples, size_t* train_count,
                    int* in_h, int* in_w, int* in_c, int* label_len) {
  if (int rc = require(d, "dataset")) return rc;
  if (samples) *samples = d->d.samples.size();
  if (train_count) *train_count = d->d.train_count;
  if (in_h) *in_h = d->d.in_h;
  if (in_w) *in_w = d->d.in_w;
  if (in_c) *in_c = d->d.in_c;
  if (label_len) *label_len = d->d.label_len;
  g_last_error.clear();
  return LC_OK;
}

}  // extern "C"
