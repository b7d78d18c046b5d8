/* C interface to the random current library. Every function returns an
 * rci_status; on failure rci_last_error() describes the problem (per thread).
 * Strings returned through char** are owned by the caller and released with
 * rci_string_free. */
#ifndef RCISING_H
#define RCISING_H

#include <stdint.h>

#if defined(RCI_BUILDING_LIBRARY)
#define RCI_API __attribute__((visibility("default")))
#else
#define RCI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rci_status {
  RCI_OK = 0,
  RCI_ERR_SIZE = 1,
  RCI_ERR_CONDITION = 2,
  RCI_ERR_PRECISION = 3,
  RCI_ERR_DOMAIN = 4,
  RCI_ERR_HOST = 5,
  RCI_ERR_BUDGET = 6,
  RCI_ERR_INSUFFICIENT_DATA = 7,
  RCI_ERR_ERGODICITY = 8,
  RCI_ERR_CONFIG = 9,
  RCI_ERR_IO = 10,
  RCI_ERR_MISSING_INPUT = 11,
  RCI_ERR_INVALID_ARGUMENT = 12,
  RCI_ERR_INTERNAL = 99
} rci_status;

typedef enum rci_boundary { RCI_BOUNDARY_FREE = 0, RCI_BOUNDARY_PLUS = 1, RCI_BOUNDARY_MINUS = 2 } rci_boundary;

typedef enum rci_sampler { RCI_SAMPLER_HEAT_BATH = 0, RCI_SAMPLER_FK = 1, RCI_SAMPLER_WORM = 2 } rci_sampler;

typedef struct rci_config rci_config;
typedef struct rci_graph rci_graph;

RCI_API const char* rci_version(void);
RCI_API const char* rci_last_error(void);
RCI_API void rci_string_free(char* s);
/* CLI exit code for a status (0 ok, 2 condition, 3 config, 4 I/O, 5 missing input). */
RCI_API int rci_exit_code(rci_status status);

/* Configuration (INI text, see README). */
RCI_API rci_status rci_config_parse(const char* text, rci_config** out);
RCI_API rci_status rci_config_load(const char* path, rci_config** out);
RCI_API rci_status rci_config_default(rci_config** out);
RCI_API void rci_config_free(rci_config* config);
RCI_API rci_status rci_config_set_seed(rci_config* config, uint64_t seed);
RCI_API rci_status rci_config_set_output_dir(rci_config* config, const char* dir);
/* Echo with every default materialized; parsing it reproduces the config. */
RCI_API rci_status rci_config_echo(const rci_config* config, char** ini);

/* Commands. exit_code follows the CLI contract; the JSON/text result is set
 * whenever the status is RCI_OK. */
RCI_API rci_status rci_validate(const rci_config* config, int* exit_code, char** report_json);
RCI_API rci_status rci_verify(const rci_config* config, const char* filter, int workers, int* exit_code,
                              char** result_json);
RCI_API rci_status rci_scan(const rci_config* config, int workers, int* exit_code, char** manifest_json);
RCI_API rci_status rci_report(const char* dir, char** table);

/* Graphs. A ghost index of -1 means no ghost; otherwise it must equal n - 1. */
RCI_API rci_status rci_graph_from_pairs(int vertex_count, int pair_count, const int* u, const int* v,
                                        const double* coupling, int ghost, rci_graph** out);
/* Graph of the [graph] section, optionally with its ghost vertex appended. */
RCI_API rci_status rci_graph_from_config(const rci_config* config, int with_ghost, rci_graph** out);
RCI_API void rci_graph_free(rci_graph* graph);
RCI_API int rci_graph_vertex_count(const rci_graph* graph);
RCI_API int rci_graph_pair_count(const rci_graph* graph);
/* Ghost vertex index, or -1. */
RCI_API int rci_graph_ghost(const rci_graph* graph);

/* Exact quantities. */
RCI_API rci_status rci_two_point(const rci_graph* graph, double beta, int x, int y, int cap, double* value,
                                 double* error_bound);
RCI_API rci_status rci_spin_correlation(const rci_graph* graph, double beta, rci_boundary boundary, int x, int y,
                                        double* value);
RCI_API rci_status rci_fk_connection(const rci_graph* graph, double beta, int wired, int x, int y, double* value);

/* Monte Carlo estimate of <s_x s_y>. Heat bath and worm use the ghost when
 * present (plus boundary); FK is wired when a ghost is present. */
RCI_API rci_status rci_mc_two_point(const rci_graph* graph, double beta, rci_sampler sampler, uint64_t seed,
                                    int chains, int64_t sweeps, int x, int y, double* mean, double* stderr_out);

#ifdef __cplusplus
}
#endif

#endif
