/* Build: cc demo.c -Iinclude -L<target>/release -l:libskewlab_ffi.a -lm -lpthread -ldl */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "skewlab.h"

static int check(SkewlabStatus s) {
    if (s != SKEWLAB_STATUS_OK) {
        fprintf(stderr, "skewlab error %d: %s\n", (int)s, skewlab_last_error());
        exit(1);
    }
    return 0;
}

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s config.json\n", argv[0]);
        return 2;
    }
    SkewlabConfig *cfg = NULL;
    check(skewlab_config_load(argv[1], &cfg));

    SkewlabSimulation *sim = NULL;
    check(skewlab_simulation_new(cfg, &sim));
    size_t n = 0;
    check(skewlab_simulation_len(sim, &n));
    check(skewlab_simulation_advance(sim, 100));
    double t = 0.0, dt = 0.0;
    check(skewlab_simulation_time(sim, &t, &dt));
    double *u = malloc(n * sizeof *u);
    check(skewlab_simulation_values(sim, u, n));
    double sup = 0.0;
    for (size_t i = 0; i < n; i++) sup = fmax(sup, fabs(u[i]));
    printf("skewlab %s: t = %.4f, %zu nodes, sup |u| = %.6f\n", skewlab_version(), t, n, sup);

    free(u);
    skewlab_simulation_free(sim);
    skewlab_config_free(cfg);
    return 0;
}
