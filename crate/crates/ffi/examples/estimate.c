#include <stdio.h>
#include "dirichlet_mc.h"

int main(void) {
    DmcDomain *disk = NULL;
    DmcBoundary *f = NULL;
    DmcWalkParams params;
    DmcEstimate est;
    const double x[2] = {0.3, 0.0};

    if (dmc_domain_from_json("{\"type\":\"ball\",\"center\":[0,0],\"radius\":1}", &disk) != DMC_STATUS_OK ||
        dmc_boundary_from_json("{\"type\":\"coordinate\",\"index\":0}", disk, &f) != DMC_STATUS_OK ||
        dmc_walk_params_default(disk, &params) != DMC_STATUS_OK) {
        fprintf(stderr, "setup failed: %s\n", dmc_last_error_message());
        return 1;
    }
    if (dmc_estimate_point(disk, f, x, 2, &params, 20000, 1, &est) != DMC_STATUS_OK) {
        fprintf(stderr, "estimate failed: %s\n", dmc_last_error_message());
        return 1;
    }
    printf("h(0.3, 0) = %.6f +/- %.6f (%.1f steps per walk)\n", est.mean, est.std_error, est.mean_steps);

    DmcStatus bad = dmc_estimate_point(disk, f, x, 3, &params, 10, 1, &est);
    printf("wrong dimension: %s (%s)\n", dmc_status_str(bad), dmc_last_error_message());

    dmc_boundary_free(f);
    dmc_domain_free(disk);
    return bad == DMC_STATUS_DIMENSION_MISMATCH ? 0 : 1;
}
