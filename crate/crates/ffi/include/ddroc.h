#ifndef DDROC_H
#define DDROC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DdrocStatus {
  DDROC_STATUS_OK = 0,
  DDROC_STATUS_NULL_POINTER = 1,
  DDROC_STATUS_INVALID_ARGUMENT = 2,
  DDROC_STATUS_DIMENSION_MISMATCH = 3,
  DDROC_STATUS_INVALID_PROBABILITY = 4,
  DDROC_STATUS_INVALID_GRAPH = 5,
  DDROC_STATUS_INFEASIBLE = 6,
  DDROC_STATUS_SOLVER = 7,
  DDROC_STATUS_UNREACHABLE = 8,
  DDROC_STATUS_PARSE = 9,
  DDROC_STATUS_IO = 10,
  DDROC_STATUS_BUFFER_TOO_SMALL = 11,
  DDROC_STATUS_PANIC = 12,
} DdrocStatus;

/*
 Opaque undirected graph.
 */
typedef struct DdrocGraph DdrocGraph;

/*
 Opaque result of a chain-design solve.
 */
typedef struct DdrocSolution DdrocSolution;

/*
 Projected-gradient settings; see [`ddroc_solver_options_default`].
 */
typedef struct DdrocSolverOptions {
  double tolerance;
  size_t max_iters;
  double armijo_c;
  double armijo_rho;
  double lambda_floor;
} DdrocSolverOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Copies the calling thread's last error message (empty after a success)
 into `buf` as a NUL-terminated string, truncating to `len - 1` bytes.
 Returns the full message length in bytes, excluding the terminator.

 # Safety
 `buf` is null or valid for `len` bytes.
 */
size_t ddroc_last_error_message(char *buf, size_t len);

struct DdrocSolverOptions ddroc_solver_options_default(void);

/*
 Radius `m / c - 1` whose worst case averages the `c` largest costs
 under a uniform nominal.

 # Safety
 `out` is valid for one write.
 */
enum DdrocStatus ddroc_radius_for_subset_size(size_t m, size_t c, double *out);

/*
 Worst-case expectation of `costs` over the density-ratio ball of
 `radius` around `q0`. `witness` (length `m`) receives a maximizing
 distribution when non-null.

 # Safety
 `costs` and `q0` are valid for `m` reads, `value` for one write and
 `witness` is null or valid for `m` writes.
 */
enum DdrocStatus ddroc_worst_expectation(const double *costs,
                                         const double *q0,
                                         size_t m,
                                         double radius,
                                         double *value,
                                         double *witness);

/*
 Minimizes the smooth dual of the worst-case expectation. `lambdas`
 (length `m`) and `nu` receive the dual point when non-null. A null
 `opts` selects the defaults.

 # Safety
 As [`ddroc_worst_expectation`]; `opts` is null or points to a valid
 options struct and `nu` is null or valid for one write.
 */
enum DdrocStatus ddroc_inner_dual(const double *costs,
                                  const double *q0,
                                  size_t m,
                                  double radius,
                                  const struct DdrocSolverOptions *opts,
                                  double *value,
                                  double *lambdas,
                                  double *nu);

/*
 Creates a graph with `node_count` nodes and no edges.

 # Safety
 `out` is valid for one write.
 */
enum DdrocStatus ddroc_graph_new(size_t node_count, struct DdrocGraph **out);

/*
 Adds the undirected edge `{j, k}`; `j == k` adds a self-loop.

 # Safety
 `graph` is a live handle.
 */
enum DdrocStatus ddroc_graph_add_edge(struct DdrocGraph *graph, size_t j, size_t k);

/*
 Reads a graph file: an `m <node_count>` header, then one 1-based `j k`
 pair per line.

 # Safety
 `path` is a NUL-terminated UTF-8 string and `out` is valid for one write.
 */
enum DdrocStatus ddroc_graph_load(const char *path, struct DdrocGraph **out);

/*
 Seeded Watts-Strogatz small-world graph.

 # Safety
 `out` is valid for one write.
 */
enum DdrocStatus ddroc_graph_watts_strogatz(size_t n,
                                            size_t ring_neighbors,
                                            double beta,
                                            bool with_self_loops,
                                            uint64_t seed,
                                            struct DdrocGraph **out);

/*
 Returns 0 for a null handle.

 # Safety
 `graph` is null or a live handle.
 */
size_t ddroc_graph_node_count(const struct DdrocGraph *graph);

/*
 Number of undirected edges, self-loops included; 0 for a null handle.

 # Safety
 `graph` is null or a live handle.
 */
size_t ddroc_graph_edge_count(const struct DdrocGraph *graph);

/*
 # Safety
 `graph` is null or a handle not yet freed.
 */
void ddroc_graph_free(struct DdrocGraph *graph);

/*
 Designs the reversible chain on `graph` with stationary distribution `pi`
 that minimizes the `q0`-expected mean hitting time. `pi` and `q0` have
 one entry per node; a null `opts` selects the defaults.

 # Safety
 `graph` is a live handle, `pi` and `q0` are valid for `node_count`
 reads, `opts` is null or valid and `out` is valid for one write.
 */
enum DdrocStatus ddroc_solve_nominal(const struct DdrocGraph *graph,
                                     const double *pi,
                                     const double *q0,
                                     const struct DdrocSolverOptions *opts,
                                     struct DdrocSolution **out);

/*
 As [`ddroc_solve_nominal`], minimizing the worst-case expected hitting
 time over the density-ratio ball of `radius` around `q0`.

 # Safety
 As [`ddroc_solve_nominal`].
 */
enum DdrocStatus ddroc_solve_robust(const struct DdrocGraph *graph,
                                    const double *pi,
                                    const double *q0,
                                    double radius,
                                    const struct DdrocSolverOptions *opts,
                                    struct DdrocSolution **out);

/*
 Returns 0 for a null handle.

 # Safety
 `solution` is null or a live handle.
 */
size_t ddroc_solution_node_count(const struct DdrocSolution *solution);

/*
 Objective value: nominal mean for nominal solves, worst-case
 expectation for robust ones. NaN for a null handle.

 # Safety
 `solution` is null or a live handle.
 */
double ddroc_solution_cost(const struct DdrocSolution *solution);

/*
 Mean hitting time of every goal node, `len >= node_count`.

 # Safety
 `solution` is a live handle and `out` is valid for `len` writes.
 */
enum DdrocStatus ddroc_solution_hitting_times(const struct DdrocSolution *solution,
                                              double *out,
                                              size_t len);

/*
 Row-major transition matrix, `len >= node_count * node_count`.

 # Safety
 `solution` is a live handle and `out` is valid for `len` writes.
 */
enum DdrocStatus ddroc_solution_transition(const struct DdrocSolution *solution,
                                           double *out,
                                           size_t len);

/*
 # Safety
 `solution` is null or a handle not yet freed.
 */
void ddroc_solution_free(struct DdrocSolution *solution);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DDROC_H */
