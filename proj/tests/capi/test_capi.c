/* C API smoke test, compiled as C. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rcising/rcising.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

int main(void) {
  EXPECT(strlen(rci_version()) > 0);

  /* Single pair: <s_0 s_1> = tanh(beta J). */
  const int u[] = {0};
  const int v[] = {1};
  const double j[] = {0.8};
  rci_graph* pair = NULL;
  EXPECT(rci_graph_from_pairs(2, 1, u, v, j, -1, &pair) == RCI_OK);
  EXPECT(rci_graph_vertex_count(pair) == 2);
  EXPECT(rci_graph_pair_count(pair) == 1);
  EXPECT(rci_graph_ghost(pair) == -1);
  double value = 0.0, bound = 0.0;
  EXPECT(rci_two_point(pair, 0.5, 0, 1, 20, &value, &bound) == RCI_OK);
  EXPECT(fabs(value - tanh(0.4)) < 1e-14);
  EXPECT(rci_spin_correlation(pair, 0.5, RCI_BOUNDARY_FREE, 0, 1, &value) == RCI_OK);
  EXPECT(fabs(value - tanh(0.4)) < 1e-14);
  EXPECT(rci_fk_connection(pair, 0.5, 0, 0, 1, &value) == RCI_OK);
  EXPECT(fabs(value - tanh(0.4)) < 1e-14);
  double mean = 0.0, se = 0.0;
  EXPECT(rci_mc_two_point(pair, 0.5, RCI_SAMPLER_FK, 3, 2, 4000, 0, 1, &mean, &se) == RCI_OK);
  EXPECT(fabs(mean - tanh(0.4)) < 5.0 * se + 1e-12);

  /* Errors carry a status and a message. */
  EXPECT(rci_two_point(pair, -1.0, 0, 1, 10, &value, NULL) == RCI_ERR_DOMAIN);
  EXPECT(strlen(rci_last_error()) > 0);
  EXPECT(rci_exit_code(RCI_ERR_DOMAIN) == 2);
  EXPECT(rci_mc_two_point(pair, 0.5, (rci_sampler)7, 1, 1, 100, 0, 1, &mean, NULL) == RCI_ERR_INVALID_ARGUMENT);
  EXPECT(rci_two_point(NULL, 0.5, 0, 1, 10, &value, NULL) == RCI_ERR_INVALID_ARGUMENT);
  rci_graph_free(pair);

  /* Ghost must be the last vertex. */
  const int gu[] = {0, 0, 1};
  const int gv[] = {1, 2, 2};
  const double gj[] = {1.0, 0.5, 0.5};
  rci_graph* ghost = NULL;
  EXPECT(rci_graph_from_pairs(3, 3, gu, gv, gj, 0, &ghost) != RCI_OK);
  EXPECT(rci_graph_from_pairs(3, 3, gu, gv, gj, 2, &ghost) == RCI_OK);
  EXPECT(rci_graph_ghost(ghost) == 2);
  double plus = 0.0, wired = 0.0;
  EXPECT(rci_spin_correlation(ghost, 0.7, RCI_BOUNDARY_PLUS, 0, 1, &plus) == RCI_OK);
  EXPECT(rci_fk_connection(ghost, 0.7, 1, 0, 1, &wired) == RCI_OK);
  EXPECT(fabs(plus - wired) < 1e-12);
  rci_graph_free(ghost);

  /* Configuration. */
  rci_config* config = NULL;
  EXPECT(rci_config_parse("[graph]\nfamily = box\nside = 3\n[model]\nbeta = 0.4\n", &config) == RCI_OK);
  EXPECT(rci_config_set_seed(config, 99) == RCI_OK);
  char* ini = NULL;
  EXPECT(rci_config_echo(config, &ini) == RCI_OK);
  EXPECT(ini && strstr(ini, "seed = 99") != NULL);
  rci_config* again = NULL;
  EXPECT(rci_config_parse(ini, &again) == RCI_OK);
  rci_string_free(ini);
  rci_config_free(again);

  int code = -1;
  char* report = NULL;
  EXPECT(rci_validate(config, &code, &report) == RCI_OK);
  EXPECT(code == 0);
  EXPECT(report && strstr(report, "C1") != NULL);
  rci_string_free(report);

  rci_graph* box = NULL;
  EXPECT(rci_graph_from_config(config, 1, &box) == RCI_OK);
  EXPECT(rci_graph_vertex_count(box) == 10);
  EXPECT(rci_graph_ghost(box) == 9);
  rci_graph_free(box);

  char* result = NULL;
  EXPECT(rci_verify(config, "increment", 1, &code, &result) == RCI_OK);
  EXPECT(code == 0);
  EXPECT(result && strstr(result, "\"increment\"") != NULL && strstr(result, "\"switching\"") == NULL);
  rci_string_free(result);
  rci_config_free(config);

  rci_config* bad = NULL;
  EXPECT(rci_config_parse("[graph]\nshape = round\n", &bad) == RCI_ERR_CONFIG);
  EXPECT(bad == NULL);
  EXPECT(rci_exit_code(RCI_ERR_CONFIG) == 3);
  EXPECT(rci_report("/nonexistent/rci", &report) == RCI_ERR_MISSING_INPUT);
  EXPECT(rci_exit_code(RCI_ERR_MISSING_INPUT) == 5);

  if (failures) {
    fprintf(stderr, "%d C API check(s) failed\n", failures);
    return 1;
  }
  printf("C API checks passed\n");
  return 0;
}
