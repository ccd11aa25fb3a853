/*
 * qkdrisk — C API for the QBER risk analysis library.
 *
 * All functions return qkdrisk_status; qkdrisk_last_error() describes the
 * most recent failure on the calling thread. Objects returned through
 * out-parameters are owned by the caller and released with the matching
 * *_free function.
 */
#ifndef QKDRISK_H
#define QKDRISK_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qkdrisk_status {
    QKDRISK_OK = 0,
    QKDRISK_ERR_INVALID = 1,  /* bad argument (null pointer, out of range) */
    QKDRISK_ERR_CONFIG = 2,   /* configuration error */
    QKDRISK_ERR_DATA = 3,     /* malformed or inconsistent data */
    QKDRISK_ERR_IO = 4,       /* filesystem failure */
    QKDRISK_ERR_INTERNAL = 5
} qkdrisk_status;

typedef struct qkdrisk_config qkdrisk_config;
typedef struct qkdrisk_series qkdrisk_series;

const char* qkdrisk_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* qkdrisk_last_error(void);

/* ---- configuration ---------------------------------------------------- */

/* Built-in defaults: 30km profile, reference learner and risk settings. */
qkdrisk_status qkdrisk_config_default(qkdrisk_config** out);

/* Parses a sectioned key = value file. */
qkdrisk_status qkdrisk_config_load(const char* path, qkdrisk_config** out);

/* Sets one key, e.g. ("attack.upsilon_e", "500") or ("seed", "7"). */
qkdrisk_status qkdrisk_config_set(qkdrisk_config* cfg, const char* key, const char* value);

void qkdrisk_config_free(qkdrisk_config* cfg);

/* ---- series ----------------------------------------------------------- */

qkdrisk_status qkdrisk_series_load_csv(const char* path, qkdrisk_series** out);
qkdrisk_status qkdrisk_series_save_csv(const qkdrisk_series* series, const char* path);

/* The series the config describes: the CSV, or a deterministic simulation
 * with optional attack injection. */
qkdrisk_status qkdrisk_series_resolve(const qkdrisk_config* cfg, qkdrisk_series** out);

size_t qkdrisk_series_size(const qkdrisk_series* series);
/* qber value at index, or NaN when out of range */
double qkdrisk_series_qber(const qkdrisk_series* series, size_t index);
/* 1 if the sample carries a true attack label, 0 otherwise */
int qkdrisk_series_attacked(const qkdrisk_series* series, size_t index);
size_t qkdrisk_series_labeled_count(const qkdrisk_series* series);

void qkdrisk_series_free(qkdrisk_series* series);

/* ---- pipeline stages --------------------------------------------------- */

/* Each stage reads/writes files under the config's output directory and
 * records a manifest of input/output content hashes. */
qkdrisk_status qkdrisk_run_simulate(const qkdrisk_config* cfg);
qkdrisk_status qkdrisk_run_train(const qkdrisk_config* cfg);
qkdrisk_status qkdrisk_run_test(const qkdrisk_config* cfg);
qkdrisk_status qkdrisk_run_risk(const qkdrisk_config* cfg);

/* Summarizes a finished run directory (writes summary.txt there). When
 * compare_dir is non-NULL the summary includes a side-by-side table.
 * *summary_out receives a heap string; free with qkdrisk_string_free. */
qkdrisk_status qkdrisk_run_report(const char* run_dir, const char* compare_dir,
                                  char** summary_out);

void qkdrisk_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* QKDRISK_H */
