/*
 * C interface to the exploration pipeline. All entry points return a status
 * code (FSMP_OK on success); every failure leaves a thread-local message
 * retrievable with fsmp_last_error(). Objects returned through out-pointers
 * are owned by the caller and released with the matching _free function.
 *
 * String getters follow a two-call protocol: pass len with the buffer
 * capacity; on FSMP_ERR_BUFFER the required size (including the NUL) has
 * been written back through len.
 */
#ifndef FSMP_H_
#define FSMP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FSMP_API __declspec(dllexport)
#else
#define FSMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum fsmp_status {
  FSMP_OK = 0,
  FSMP_ERR_NULL_POINTER = -1,
  FSMP_ERR_INVALID_ARGUMENT = -2,
  FSMP_ERR_IO = -3,
  FSMP_ERR_RUNTIME = -4,
  FSMP_ERR_BUFFER = -5
};

FSMP_API const char* fsmp_version(void);
FSMP_API const char* fsmp_last_error(void);

/* ------------------------------------------------------------------ */
/* Scenarios                                                           */

typedef struct fsmp_scenario fsmp_scenario_t;

FSMP_API int fsmp_scenario_load(const char* path, fsmp_scenario_t** out);
FSMP_API int fsmp_scenario_parse(const char* text, fsmp_scenario_t** out);
FSMP_API int fsmp_scenario_set_seed(fsmp_scenario_t* sc, uint64_t seed);
FSMP_API int fsmp_scenario_text(const fsmp_scenario_t* sc, char* buf, size_t* len);
FSMP_API void fsmp_scenario_free(fsmp_scenario_t* sc);

/* ------------------------------------------------------------------ */
/* Runs and replays                                                    */

typedef struct fsmp_run_result fsmp_run_result_t;

typedef struct fsmp_run_options {
  const char* metrics_path; /* NULL: no metrics stream */
  const char* record_path;  /* NULL: no replay journal */
  int verify;               /* nonzero: per-epoch oracle verification */
  int mutation_batch;       /* per-epoch injected state flips */
  int64_t mutation_limit;   /* total injected flips */
  uint64_t mutation_seed;
  int log_progress;         /* nonzero: progress lines on stderr */
} fsmp_run_options_t;

FSMP_API int fsmp_run(const fsmp_scenario_t* sc, const fsmp_run_options_t* opt,
                      fsmp_run_result_t** out);

FSMP_API int fsmp_replay(const char* journal_path, int mutation_batch, int64_t mutation_limit,
                         uint64_t mutation_seed, int log_progress, fsmp_run_result_t** out);

FSMP_API int fsmp_result_exit_code(const fsmp_run_result_t* r);     /* 0 clean, 2 budget */
FSMP_API int fsmp_result_complete(const fsmp_run_result_t* r);
FSMP_API int64_t fsmp_result_epochs(const fsmp_run_result_t* r);
FSMP_API int64_t fsmp_result_scans(const fsmp_run_result_t* r);
FSMP_API double fsmp_result_sim_time(const fsmp_run_result_t* r);
FSMP_API double fsmp_result_distance(const fsmp_run_result_t* r);
FSMP_API double fsmp_result_coverage(const fsmp_run_result_t* r);
FSMP_API int64_t fsmp_result_safety_violations(const fsmp_run_result_t* r);
FSMP_API int64_t fsmp_result_frontier_voxels(const fsmp_run_result_t* r);
FSMP_API int fsmp_result_verify_failed(const fsmp_run_result_t* r);
FSMP_API int64_t fsmp_result_failure_epoch(const fsmp_run_result_t* r);

/* Replay verdict: 1 when the re-run matched the journal (or, for mutation
 * replays, when every per-epoch oracle check passed). Plain runs report 1. */
FSMP_API int fsmp_result_matched(const fsmp_run_result_t* r);

FSMP_API int fsmp_result_failure(const fsmp_run_result_t* r, char* buf, size_t* len);
/* CSV summary: header line plus one data row. */
FSMP_API int fsmp_result_summary_csv(const fsmp_run_result_t* r, char* buf, size_t* len);
FSMP_API void fsmp_result_free(fsmp_run_result_t* r);

/* ------------------------------------------------------------------ */
/* Detector benchmark                                                  */

typedef struct fsmp_bench_result fsmp_bench_result_t;

/* detectors_csv: comma-separated subset of f3d,aabb_rg,aabb_wfd,naive */
FSMP_API int fsmp_bench(const fsmp_scenario_t* sc, const char* detectors_csv, int log_progress,
                        fsmp_bench_result_t** out);
FSMP_API int fsmp_bench_sets_match(const fsmp_bench_result_t* r);
FSMP_API int64_t fsmp_bench_epochs(const fsmp_bench_result_t* r);
/* Per-iteration CSV: detector,iteration,scanned_voxels,micros */
FSMP_API int fsmp_bench_csv(const fsmp_bench_result_t* r, char* buf, size_t* len);
/* Aggregated table: detector, avg/std scanned voxels, avg/std micros. */
FSMP_API int fsmp_bench_summary(const fsmp_bench_result_t* r, char* buf, size_t* len);
FSMP_API void fsmp_bench_result_free(fsmp_bench_result_t* r);

/* ------------------------------------------------------------------ */
/* World generation                                                    */

/* kind: "maze" or "building"; writes a scene file. */
FSMP_API int fsmp_world_generate(const char* kind, double size_x, double size_y, double size_z,
                                 double resolution, uint64_t seed, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FSMP_H_ */
