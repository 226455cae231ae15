/*
 * vulnprio: CVSS v3.1 temporal scoring and Bayesian attack graph inference.
 *
 * C interface over the C++ core. Objects are opaque handles released with
 * their *_free function. Every call returns a vp_status; on failure a
 * description is available from vp_last_error() on the same thread until
 * the next call. Strings returned through char** are heap-allocated and
 * must be released with vp_string_free().
 */
#ifndef VULNPRIO_VULNPRIO_H
#define VULNPRIO_VULNPRIO_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(VULNPRIO_BUILDING)
#    define VP_API __declspec(dllexport)
#  else
#    define VP_API __declspec(dllimport)
#  endif
#else
#  define VP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vp_status {
  VP_OK = 0,
  VP_ERR_INVALID_ARGUMENT = 1,
  VP_ERR_PARSE = 2,
  VP_ERR_IO = 3,
  VP_ERR_CONFIG = 4,
  VP_ERR_VALIDATION = 5,
  VP_ERR_UNKNOWN_CVE = 6,
  VP_ERR_UNKNOWN_NODE = 7,
  VP_ERR_MISSING_SCORE = 8,
  VP_ERR_MISSING_SCORE_FOR = 9,
  VP_ERR_ROOT_NODE = 10,
  VP_ERR_INCOMPLETE_ASSIGNMENT = 11,
  VP_ERR_GRAPH_TOO_LARGE = 12,
  VP_ERR_ZERO_PROBABILITY_EVIDENCE = 13,
  VP_ERR_TRANSPORT = 14,
  VP_ERR_MALFORMED_RESPONSE = 15,
  VP_ERR_NOT_FOUND = 16,
  VP_ERR_INTERNAL = 99
} vp_status;

typedef enum vp_ecm {
  VP_ECM_NOT_DEFINED = 0,
  VP_ECM_HIGH,
  VP_ECM_FUNCTIONAL,
  VP_ECM_PROOF_OF_CONCEPT,
  VP_ECM_UNPROVEN
} vp_ecm;

typedef enum vp_rl {
  VP_RL_NOT_DEFINED = 0,
  VP_RL_UNAVAILABLE,
  VP_RL_WORKAROUND,
  VP_RL_TEMPORARY_FIX,
  VP_RL_OFFICIAL_FIX
} vp_rl;

typedef enum vp_rc {
  VP_RC_NOT_DEFINED = 0,
  VP_RC_CONFIRMED,
  VP_RC_REASONABLE,
  VP_RC_UNKNOWN
} vp_rc;

typedef enum vp_variant { VP_VARIANT_BASE = 0, VP_VARIANT_TEMPORAL = 1 } vp_variant;

typedef enum vp_format { VP_FORMAT_JSON = 0, VP_FORMAT_CSV = 1, VP_FORMAT_MARKDOWN = 2 } vp_format;

typedef enum vp_backend { VP_BACKEND_FIXTURE = 0, VP_BACKEND_LIVE = 1 } vp_backend;

typedef struct vp_graph vp_graph;
typedef struct vp_scores vp_scores;

typedef struct vp_evidence {
  const char* node_id;
  int state; /* nonzero: compromised */
} vp_evidence;

VP_API const char* vp_version(void);
VP_API const char* vp_status_name(vp_status status);
VP_API const char* vp_last_error(void);
VP_API void vp_string_free(char* str);

/* ---- Temporal scoring (scores are integer tenths: 9.8 -> 98) ---- */

/* Table multiplier in hundredths (0.97 -> 97). */
VP_API vp_status vp_ecm_multiplier(vp_ecm level, int* out_hundredths);
VP_API vp_status vp_rl_multiplier(vp_rl level, int* out_hundredths);
VP_API vp_status vp_rc_multiplier(vp_rc level, int* out_hundredths);

VP_API vp_status vp_temporal_score(int base_tenths, vp_ecm ecm, vp_rl rl, vp_rc rc,
                                   int* out_tenths);

/* JSON array of {"ecm","rl","rc","vector"} reproducing target from base. */
VP_API vp_status vp_feasible_assignments(int base_tenths, int target_tenths, char** out_json);

/* ---- Attack graphs ---- */

VP_API vp_status vp_graph_parse(const char* json, vp_graph** out);
VP_API vp_status vp_graph_load(const char* path, vp_graph** out);
VP_API void vp_graph_free(vp_graph* graph);
VP_API vp_status vp_graph_to_json(const vp_graph* graph, char** out_json);
VP_API vp_status vp_graph_node_count(const vp_graph* graph, size_t* out);

/* Writes the validation report ({"valid", "findings"}) and sets *out_valid. */
VP_API vp_status vp_graph_validate(const vp_graph* graph, int* out_valid, char** out_report_json);

/* New graph with every CVE-bearing node rescored from `scores`. */
VP_API vp_status vp_graph_rescore(const vp_graph* graph, const vp_scores* scores,
                                  vp_variant variant, vp_graph** out);

/* P(target compromised | evidence) using the graph's own scores. */
VP_API vp_status vp_graph_query(const vp_graph* graph, const char* target,
                                const vp_evidence* evidence, size_t evidence_count,
                                double* out_probability);

/* Same query on the graph rescored with one score variant. This is the
 * path the HTTP service uses. */
VP_API vp_status vp_graph_query_scored(const vp_graph* graph, const vp_scores* scores,
                                       vp_variant variant, const char* target,
                                       const vp_evidence* evidence, size_t evidence_count,
                                       double* out_probability);

/* Query result as JSON {"target","evidence","probability","score_variant"}.
 * With scores == NULL the graph's own scores are used and score_variant is
 * null. */
VP_API vp_status vp_graph_query_json(const vp_graph* graph, const vp_scores* scores,
                                     vp_variant variant, const char* target,
                                     const vp_evidence* evidence, size_t evidence_count,
                                     char** out_json);

/* Brute-force reference answer; fails with VP_ERR_GRAPH_TOO_LARGE above
 * max_nodes nodes. */
VP_API vp_status vp_graph_query_enumeration(const vp_graph* graph, const char* target,
                                            const vp_evidence* evidence, size_t evidence_count,
                                            size_t max_nodes, double* out_probability);

/* ---- Scoring pipeline ---- */

typedef struct vp_score_options {
  vp_backend backend;
  const char* fixtures_dir; /* fixture backend; NULL keeps the config value */
  const char* config_path;  /* optional JSON configuration file */
  const char* record_dir;   /* live backend: write responses as fixtures */
  unsigned workers;         /* 0 keeps the config value */
} vp_score_options;

VP_API vp_status vp_score_cves(const vp_score_options* options, const char* const* cves,
                               size_t count, vp_scores** out);
VP_API vp_status vp_scores_parse(const char* json, vp_scores** out);
VP_API vp_status vp_scores_load(const char* path, vp_scores** out);
VP_API void vp_scores_free(vp_scores* scores);
VP_API vp_status vp_scores_counts(const vp_scores* scores, size_t* out_scored,
                                  size_t* out_skipped);
VP_API vp_status vp_scores_emit(const vp_scores* scores, vp_format format, char** out);

/* Scores the CVEs listed in a file: one per line, '#' starts a comment. */
VP_API vp_status vp_score_cve_file(const vp_score_options* options, const char* path,
                                   vp_scores** out);

/* Runs every scenario (JSON list) for both score variants and renders the
 * report. */
VP_API vp_status vp_report(const vp_graph* graph, const char* scenarios_json,
                           const vp_scores* scores, vp_format format, char** out);

/* ---- HTTP service ---- */

typedef struct vp_serve_options {
  const char* host;        /* NULL: 127.0.0.1 */
  int port;                /* 0: any free port */
  const char* cors_origin; /* NULL: "*"; "" disables CORS headers */
  size_t max_models;       /* 0: default (16) */
} vp_serve_options;

/* Binds, reports the address on stderr, then blocks serving requests
 * until the process is stopped. */
VP_API vp_status vp_serve(const vp_serve_options* options);

#ifdef __cplusplus
}
#endif

#endif /* VULNPRIO_VULNPRIO_H */
