/*
 * Copyright (C) 2026 The cubesim authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CUBESIM_CUBESIM_H
#define CUBESIM_CUBESIM_H

/*
 * C interface to the cubesim simulator.
 *
 * A session holds a model, a configuration, an optional plan and, once
 * started, a running simulation. Functions return CUBESIM_OK or an error
 * status; cubesim_last_error() describes the most recent failure.
 *
 * Returned strings are owned by the session and stay valid until the next
 * call on the same session.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CUBESIM_BUILDING)
#    define CUBESIM_API __declspec(dllexport)
#  else
#    define CUBESIM_API __declspec(dllimport)
#  endif
#else
#  define CUBESIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cubesim_session cubesim_session;

typedef enum cubesim_status {
  CUBESIM_OK = 0,
  CUBESIM_E_ARGUMENT = 1, /* null handle, bad argument, or wrong call order */
  CUBESIM_E_DEFINITION = 2, /* model, plan or config could not be loaded */
  CUBESIM_E_RUNTIME = 3,    /* the simulation raised an error */
  CUBESIM_E_IO = 4
} cubesim_status;

typedef enum cubesim_verdict {
  CUBESIM_ACCEPTED = 0,
  CUBESIM_REJECTED = 1,
  CUBESIM_VERDICT_ERROR = 2
} cubesim_verdict;

CUBESIM_API const char *cubesim_version(void);

CUBESIM_API cubesim_session *cubesim_create(void);
CUBESIM_API void cubesim_destroy(cubesim_session *s);

/* Message for the last failed call, or "" after a success. */
CUBESIM_API const char *cubesim_last_error(const cubesim_session *s);

/* Models accumulate: each call merges another file into the session model. */
CUBESIM_API cubesim_status cubesim_load_model_file(cubesim_session *s, const char *path);
CUBESIM_API cubesim_status cubesim_load_model_text(cubesim_session *s, const char *text);
/* Loads the built-in reference CubeSat model and its mission configuration. */
CUBESIM_API cubesim_status cubesim_load_reference(cubesim_session *s);

CUBESIM_API cubesim_status cubesim_load_config_file(cubesim_session *s, const char *path);
CUBESIM_API cubesim_status cubesim_load_config_text(cubesim_session *s, const char *text);
CUBESIM_API cubesim_status cubesim_set_config(cubesim_session *s, const char *key,
                                              const char *value);

/* Adds a telemetry column; source is a variable name or a machine path. */
CUBESIM_API cubesim_status cubesim_add_monitor(cubesim_session *s, const char *source,
                                               const char *label);

CUBESIM_API cubesim_status cubesim_load_plan_file(cubesim_session *s, const char *path);
CUBESIM_API cubesim_status cubesim_load_plan_text(cubesim_session *s, const char *text);
/* Loads the plan shipped with the reference model. */
CUBESIM_API cubesim_status cubesim_load_reference_plan(cubesim_session *s);

/* Builds the simulation at clock 0 and delivers plan injections due at 0. */
CUBESIM_API cubesim_status cubesim_start(cubesim_session *s, uint64_t seed);
CUBESIM_API int64_t cubesim_clock(const cubesim_session *s);
/* Advances n ticks, recording one telemetry row per tick. */
CUBESIM_API cubesim_status cubesim_step(cubesim_session *s, int64_t n);
/* Advances duration_s / tick ticks. */
CUBESIM_API cubesim_status cubesim_run(cubesim_session *s, int64_t duration_s);
CUBESIM_API size_t cubesim_row_count(const cubesim_session *s);
/* Recorded telemetry as CSV text. */
CUBESIM_API const char *cubesim_csv(cubesim_session *s);
CUBESIM_API cubesim_status cubesim_write_csv(cubesim_session *s, const char *path);

/* Delivers an event at the current clock without advancing time. */
CUBESIM_API cubesim_status cubesim_emit(cubesim_session *s, const char *event);
/* Current value rendered as telemetry text. */
CUBESIM_API const char *cubesim_get_var(cubesim_session *s, const char *name);
CUBESIM_API cubesim_status cubesim_set_var(cubesim_session *s, const char *name,
                                           const char *value);
/* One "path = STATE" line per active machine. */
CUBESIM_API const char *cubesim_states(cubesim_session *s);

/* Runs the loaded plan from a fresh start. Does not need cubesim_start. */
CUBESIM_API cubesim_status cubesim_validate(cubesim_session *s, uint64_t seed,
                                            cubesim_verdict *verdict);
/* Process exit code of the last validation: 0, 1, 2 or 3. */
CUBESIM_API int cubesim_verdict_exit_code(const cubesim_session *s);
/* Human-readable report of the last validation. */
CUBESIM_API const char *cubesim_verdict_report(const cubesim_session *s);
/* Single-line key=value record of the last validation. */
CUBESIM_API const char *cubesim_verdict_record(const cubesim_session *s);

/* Executes one debugger command on the started simulation. Sets *quit to 1
   when the command ends the session. */
CUBESIM_API const char *cubesim_debug_command(cubesim_session *s, const char *line, int *quit);
CUBESIM_API const char *cubesim_debug_help(void);

#ifdef __cplusplus
}
#endif

#endif
