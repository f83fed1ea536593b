/* lischan: channel estimation toolkit for LIS-assisted mm-Wave massive MIMO
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * C interface to the batch pipeline: dataset generation, network training
 * and Monte Carlo sweeps, each driven by a JSON config file.  All functions
 * return a status code; on failure lc_last_error() describes the problem for
 * the calling thread.
 */

#ifndef LISCHAN_H
#define LISCHAN_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LC_OK 0
#define LC_ERR_CONFIG 2  /* invalid or unreadable configuration */
#define LC_ERR_DATA 3    /* bad data file or I/O failure */
#define LC_ERR_NUMERIC 4 /* numerical failure (rank deficiency, divergence) */

const char* lc_version(void);

/* Message for the most recent failure on this thread; empty on success. */
const char* lc_last_error(void);

/* Batch jobs.  seed_override may be NULL to use the seed from the config;
 * threads caps worker parallelism (values < 1 mean 1). */
int lc_generate(const char* config_path, const char* out_dir,
                const uint64_t* seed_override, int threads);
int lc_train(const char* config_path, const char* out_dir,
             const uint64_t* seed_override);
int lc_sweep(const char* config_path, const char* out_dir,
             const uint64_t* seed_override, int threads);

/* Read-only view of an emitted sweep result (the .json artifact). */
typedef struct lc_result lc_result;
int lc_result_open(const char* json_path, lc_result** out);
void lc_result_close(lc_result* r);
int lc_result_cell_count(const lc_result* r, size_t* out);
int lc_result_cell(const lc_result* r, size_t idx, double* grid_value,
                   double* nmse_direct, double* nmse_cascaded);
/* Copies the estimator identifier of cell idx into buf (NUL terminated,
 * truncated to buflen). */
int lc_result_estimator(const lc_result* r, size_t idx, char* buf,
                        size_t buflen);

/* Read-only view of a dataset file header. */
typedef struct lc_dataset lc_dataset;
int lc_dataset_open(const char* path, lc_dataset** out);
void lc_dataset_close(lc_dataset* d);
int lc_dataset_info(const lc_dataset* d, size_t* samples, size_t* train_count,
                    int* in_h, int* in_w, int* in_c, int* label_len);

#ifdef __cplusplus
}
#endif

#endif /* LISCHAN_H */
