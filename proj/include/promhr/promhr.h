/* Copyright 2026 The promhr Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the promhr shared library. All functions return a status
 * code; on failure promhr_last_error() describes the problem (per thread).
 */
#ifndef PROMHR_PROMHR_H
#define PROMHR_PROMHR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define PROMHR_API __declspec(dllexport)
#elif defined(__GNUC__)
#  define PROMHR_API __attribute__((visibility("default")))
#else
#  define PROMHR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

enum promhr_status
{
   PROMHR_OK = 0,
   PROMHR_ERR_INTERNAL = 1,
   PROMHR_ERR_VALIDATION = 2,   /* bad config, bad arguments */
   PROMHR_ERR_NUMERICAL = 3,    /* divergence, singular systems, incompatible bases */
   PROMHR_ERR_ARTIFACT = 4      /* missing, stale or unreadable files */
};

typedef struct promhr_pipeline promhr_pipeline;

PROMHR_API const char *promhr_version(void);
PROMHR_API const char *promhr_last_error(void);

/* Parses and validates a JSON config without touching the file system. */
PROMHR_API int promhr_validate_config(const char *config_json);

/* output_dir overrides the config's output_dir when non-NULL; a non-zero
 * strategy_count replaces the config's strategy list. */
PROMHR_API int promhr_pipeline_open(const char *config_json, const char *output_dir,
                                    const char *const *strategies, size_t strategy_count,
                                    promhr_pipeline **out);
PROMHR_API void promhr_pipeline_close(promhr_pipeline *pipeline);

PROMHR_API int promhr_pipeline_run(promhr_pipeline *pipeline);
PROMHR_API int promhr_pipeline_run_stage(promhr_pipeline *pipeline, const char *stage);

/* Stages executed (not skipped as fresh) since the pipeline was opened. */
PROMHR_API int promhr_pipeline_executed_count(const promhr_pipeline *pipeline, size_t *count);
PROMHR_API int promhr_pipeline_executed_stage(const promhr_pipeline *pipeline, size_t index,
                                              const char **stage);

/* Manifest listing, one "stage<TAB>path<TAB>sha256" line per output file.
 * Writes at most capacity bytes including the terminating NUL and always
 * stores the full required size. */
PROMHR_API int promhr_pipeline_artifacts(const promhr_pipeline *pipeline, char *buffer,
                                         size_t capacity, size_t *required);

PROMHR_API int promhr_pipeline_output_dir(const promhr_pipeline *pipeline, const char **dir);

/* Finite-difference check of element and assembled Jacobians of the configured
 * problem at random states, using the first training parameter. */
PROMHR_API int promhr_pipeline_check_jacobians(const promhr_pipeline *pipeline, uint64_t seed,
                                               int samples, double *worst_relative_error);

/* Reads a binary matrix file. With data == NULL only the shape is returned;
 * otherwise capacity must hold rows * cols values (column-major). */
PROMHR_API int promhr_matrix_read(const char *path, size_t *rows, size_t *cols, double *data,
                                  size_t capacity);

#ifdef __cplusplus
}
#endif

#endif /* PROMHR_PROMHR_H */
