#include <stdio.h>
#include "semiscale.h"

int main(void) {
    SemiscaleSeries *x = NULL;
    if (semiscale_simulate_sfbm(2.0, 0.9, 0.2, 100000, 100001.0, 1, &x) != SEMISCALE_STATUS_OK) {
        fprintf(stderr, "simulate: %s\n", semiscale_last_error());
        return 1;
    }
    SemiscaleScaleResult r;
    SemiscaleStatus s = semiscale_estimate_scale(x, &r);
    if (s != SEMISCALE_STATUS_OK) {
        fprintf(stderr, "estimate: %s\n", semiscale_last_error());
        semiscale_series_free(x);
        return (int)s;
    }
    printf("lambda0=%.4f lambda*=%.4f H-H'=%.4f\n", r.lambda0, r.lambda_star, r.h_minus_hprime);
    semiscale_series_free(x);
    return 0;
}
