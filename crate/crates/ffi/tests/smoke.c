#include <math.h>
#include <stdio.h>

#include "ddroc.h"

int main(void) {
    double costs[4] = {4.0, 1.0, 7.0, 2.0};
    double q0[4] = {0.25, 0.25, 0.25, 0.25};
    double value = 0.0;
    if (ddroc_worst_expectation(costs, q0, 4, 1.0, &value, NULL) != DDROC_STATUS_OK) return 1;
    if (fabs(value - 5.5) > 1e-12) return 2;

    DdrocGraph *g = NULL;
    if (ddroc_graph_watts_strogatz(6, 2, 0.0, true, 1, &g) != DDROC_STATUS_OK) return 3;
    double pi[6] = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};
    DdrocSolverOptions opts = ddroc_solver_options_default();
    DdrocSolution *sol = NULL;
    if (ddroc_solve_nominal(g, pi, pi, &opts, &sol) != DDROC_STATUS_OK) return 4;
    double hitting[6];
    if (ddroc_solution_hitting_times(sol, hitting, 6) != DDROC_STATUS_OK) return 5;
    printf("%.6f %.6f\n", ddroc_solution_cost(sol), hitting[0]);

    char msg[128];
    if (ddroc_graph_add_edge(g, 0, 42) != DDROC_STATUS_INVALID_GRAPH) return 6;
    if (ddroc_last_error_message(msg, sizeof msg) == 0) return 7;

    ddroc_solution_free(sol);
    ddroc_graph_free(g);
    return 0;
}
