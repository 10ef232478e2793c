// Copyright 2026 The dualdemo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the dualdemo library.
 *
 * Every call returns a dd_status. On failure, dd_last_error() describes the
 * error for the calling thread until its next call into the library. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with dd_string_free(). All JSON documents use the schemas of the
 * HTTP API. */
#ifndef DUALDEMO_DUALDEMO_H_
#define DUALDEMO_DUALDEMO_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DD_API __declspec(dllexport)
#else
#define DD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dd_status {
  DD_OK = 0,
  DD_ERR_INVALID_ARGUMENT = 1,
  DD_ERR_PARSE = 2,
  DD_ERR_NOT_FOUND = 3,
  DD_ERR_CONFLICT = 4,
  DD_ERR_NUMERIC = 5,
  DD_ERR_DEGENERATE_FIT = 6,
  DD_ERR_INSUFFICIENT_DATA = 7,
  DD_ERR_IO = 8,
  DD_ERR_INTERNAL = 9
} dd_status;

/* Solver outcome reported by dd_session_reproduce. */
typedef enum dd_solve_status {
  DD_SOLVE_DIRECT = 0,
  DD_SOLVE_ITERATIVE_CONVERGED = 1,
  DD_SOLVE_ITERATIVE_MAX_ITERS = 2,
  DD_SOLVE_INDEFINITE_FALLBACK = 3
} dd_solve_status;

typedef enum dd_label { DD_LABEL_SUCCESS = 0, DD_LABEL_FAILURE = 1 } dd_label;

typedef struct dd_session dd_session;
typedef struct dd_server dd_server;

DD_API const char* dd_version(void);
DD_API const char* dd_last_error(void);
DD_API void dd_string_free(char* s);

/* config_json may be NULL for defaults; otherwise a (partial) SolverConfig. */
DD_API dd_status dd_session_new(const char* config_json, dd_session** out);
DD_API void dd_session_free(dd_session* s);

/* format is "json" (TrajectoryFile) or "csv". label and id override the
 * document's own fields and may be NULL; CSV needs a label. The assigned id is
 * returned through id_out when it is not NULL. */
DD_API dd_status dd_session_add_demo(dd_session* s, const char* payload, const char* format, const char* label,
                                     const char* id, char** id_out);
DD_API dd_status dd_session_relabel(dd_session* s, const char* id, dd_label label);
DD_API dd_status dd_session_remove_demo(dd_session* s, const char* id);
DD_API dd_status dd_session_set_constraints(dd_session* s, const char* constraints_json);
DD_API dd_status dd_session_set_config(dd_session* s, const char* config_json);
DD_API dd_status dd_session_state(const dd_session* s, char** state_json);
/* Event log that rebuilds the session's inputs, one JSON event per line. */
DD_API dd_status dd_session_export(const dd_session* s, char** events_jsonl);
DD_API dd_status dd_session_import(const char* events_jsonl, dd_session** out);

/* Fitted mixtures and BIC tables of every non-empty subset in every active frame. */
DD_API dd_status dd_session_fit(const dd_session* s, char** models_json);
/* Appends the reproduction to the session history. solve_status may be NULL. */
DD_API dd_status dd_session_reproduce(dd_session* s, char** reproduction_json, dd_solve_status* solve_status);

/* Returns DD_LABEL_SUCCESS or DD_LABEL_FAILURE, or a negative value to abort. */
typedef int (*dd_labeler)(const char* reproduction_json, void* user);
/* reproduce -> label -> on failure append to the failed set, up to max_iters
 * rounds. history_json receives [{"label": ..., "reproduction": {...}}, ...]. */
DD_API dd_status dd_session_refine(dd_session* s, dd_labeler labeler, void* user, int max_iters, char** history_json);

/* a_json, b_json: arrays of rows or TrajectoryFile documents of equal shape. */
DD_API dd_status dd_metrics(const char* a_json, const char* b_json, char** metrics_json);
/* Time-major buffers of length * dim values; out receives sse, sea, crv. */
DD_API dd_status dd_metrics_raw(const double* a, const double* b, size_t length, size_t dim, double out[3]);

/* Newline-separated list of fixture names. */
DD_API dd_status dd_fixture_names(char** names);
DD_API dd_status dd_fixture(const char* name, uint64_t seed, char** fixture_json);
/* Clearance of a trajectory (rows JSON) from a fixture's obstacle; NaN-free
 * error when the fixture has none. */
DD_API dd_status dd_fixture_clearance(const char* fixture_json, const char* trajectory_json, double* clearance,
                                      double* radius);

/* state_dir may be NULL for an in-memory store. */
DD_API dd_status dd_server_new(const char* state_dir, dd_server** out);
/* host:port or port; port 0 picks a free one, reported through bound_port. */
DD_API dd_status dd_server_bind(dd_server* srv, const char* address, int* bound_port);
/* Blocks until dd_server_stop is called from another thread. */
DD_API dd_status dd_server_run(dd_server* srv);
DD_API void dd_server_stop(dd_server* srv);
DD_API void dd_server_free(dd_server* srv);

#ifdef __cplusplus
}
#endif

#endif /* DUALDEMO_DUALDEMO_H_ */
