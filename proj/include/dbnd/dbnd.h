#ifndef DBND_DBND_H
#define DBND_DBND_H

/* C interface to the degree-bounded Steiner tree library.
 *
 * Functions return a dbnd_status. On failure dbnd_last_error() describes the
 * error; the message stays valid until the next call on the same thread.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with dbnd_string_free. */

#include <stdint.h>

#if defined(_WIN32)
#define DBND_API __declspec(dllexport)
#elif defined(__GNUC__)
#define DBND_API __attribute__((visibility("default")))
#else
#define DBND_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbnd_status {
  DBND_OK = 0,
  DBND_INVALID_ARGUMENT = 1,
  DBND_INFEASIBLE = 2,
  DBND_CAP_EXCEEDED = 3,
  DBND_INVARIANT_VIOLATION = 4,
  DBND_IO = 5,
  DBND_SOLVER_FAILURE = 6,
  DBND_INTERNAL = 7
} dbnd_status;

typedef struct dbnd_dst dbnd_dst; /* directed instance */
typedef struct dbnd_gst dbnd_gst; /* group instance on a tree */

DBND_API const char* dbnd_last_error(void);
DBND_API void dbnd_string_free(char* s);
DBND_API const char* dbnd_version(void);

/* Directed instances. */
DBND_API dbnd_status dbnd_dst_parse(const char* text, dbnd_dst** out);
DBND_API dbnd_status dbnd_dst_load(const char* path, dbnd_dst** out);
DBND_API dbnd_status dbnd_dst_generate(int32_t n, int32_t m, int32_t k, int32_t d_max, int64_t cost_lo,
                                       int64_t cost_hi, uint64_t seed, dbnd_dst** out);
DBND_API dbnd_status dbnd_dst_serialize(const dbnd_dst* inst, char** out);
DBND_API int32_t dbnd_dst_vertex_count(const dbnd_dst* inst);
DBND_API int32_t dbnd_dst_terminal_count(const dbnd_dst* inst);
DBND_API void dbnd_dst_free(dbnd_dst* inst);

/* Group instances. */
DBND_API dbnd_status dbnd_gst_parse(const char* text, dbnd_gst** out);
DBND_API dbnd_status dbnd_gst_load(const char* path, dbnd_gst** out);
DBND_API dbnd_status dbnd_gst_generate(int32_t n, int32_t k, int32_t depth, int32_t d_max, int64_t cost_lo,
                                       int64_t cost_hi, uint64_t seed, dbnd_gst** out);
/* hub_degree 0 means k. */
DBND_API dbnd_status dbnd_gst_generate_broom(int32_t handle, int32_t bristles, int32_t k, int32_t group_size,
                                             int32_t hub_degree, uint64_t seed, dbnd_gst** out);
DBND_API dbnd_status dbnd_gst_serialize(const dbnd_gst* inst, char** out);
DBND_API int32_t dbnd_gst_vertex_count(const dbnd_gst* inst);
DBND_API int32_t dbnd_gst_group_count(const dbnd_gst* inst);
DBND_API void dbnd_gst_free(dbnd_gst* inst);

typedef struct dbnd_dst_options {
  int32_t height;      /* negative: default height */
  int32_t repetitions; /* 0: default repetition count */
  uint64_t seed;
  int64_t node_cap;
  int32_t full_lp;     /* nonzero: write every LP row */
  int32_t check;       /* nonzero: check every rounded selection */
  const char* instance_name;
} dbnd_dst_options;

typedef struct dbnd_gst_options {
  int32_t repetitions; /* 0: default repetition count */
  uint64_t seed;
  int32_t full_lp;
  int32_t check;
  int32_t gamma_cap;   /* negative: no cap */
  const char* instance_name;
} dbnd_gst_options;

DBND_API void dbnd_dst_options_init(dbnd_dst_options* options);
DBND_API void dbnd_gst_options_init(dbnd_gst_options* options);

/* Full pipeline; writes the JSON report. */
DBND_API dbnd_status dbnd_dst_run(const dbnd_dst* inst, const dbnd_dst_options* options, char** report);
DBND_API dbnd_status dbnd_gst_run(const dbnd_gst* inst, const dbnd_gst_options* options, char** report);

/* Single-rounding statistics over `trials` independent roundings (JSON). */
DBND_API dbnd_status dbnd_dst_trials(const dbnd_dst* inst, const dbnd_dst_options* options, int64_t trials,
                                     char** stats);
DBND_API dbnd_status dbnd_gst_trials(const dbnd_gst* inst, const dbnd_gst_options* options, int64_t trials,
                                     char** stats);

/* Exact optimum as JSON {"status", "cost", "edges" | "vertices"}. An
 * infeasible instance is reported in the JSON with DBND_OK; instances beyond
 * the oracle's limits give DBND_CAP_EXCEEDED. */
DBND_API dbnd_status dbnd_dst_oracle(const dbnd_dst* inst, char** result);
DBND_API dbnd_status dbnd_gst_oracle(const dbnd_gst* inst, char** result);

DBND_API dbnd_status dbnd_dst_dump_supertree(const dbnd_dst* inst, int32_t height, int64_t node_cap, char** text);
/* LP relaxation in MPS format. */
DBND_API dbnd_status dbnd_dst_dump_lp(const dbnd_dst* inst, const dbnd_dst_options* options, char** mps);
DBND_API dbnd_status dbnd_gst_dump_lp(const dbnd_gst* inst, int32_t full_lp, char** mps);

/* Independent check of a solution JSON (a run report or an oracle result).
 * Writes a JSON verdict {"ok", "problems", "cost", "covered", "degree_ratio"}.
 * Degree excess is a problem unless the solution declares it under
 * "degree_violations"; with strict set, any excess is a problem. */
DBND_API dbnd_status dbnd_dst_verify(const dbnd_dst* inst, const char* solution, int32_t strict, char** verdict);
DBND_API dbnd_status dbnd_gst_verify(const dbnd_gst* inst, const char* solution, int32_t strict, char** verdict);

#ifdef __cplusplus
}
#endif

#endif
