/* cc -Iinclude examples/run.c -L../../target/release -lbds_ffi -o run */
#include <stdio.h>
#include "bds.h"

int main(void) {
    BdsConfig *cfg = NULL;
    if (bds_config_parse("n_ues = 100\nsim_end_s = 36000\n", &cfg) != BDS_STATUS_OK) {
        fprintf(stderr, "config: %s\n", bds_last_error_message());
        return 1;
    }
    double targets[] = {28800.0};
    BdsRun *run = NULL;
    if (bds_run(cfg, 0, true, targets, 1, &run) != BDS_STATUS_OK) {
        fprintf(stderr, "run: %s\n", bds_last_error_message());
        bds_config_free(cfg);
        return 1;
    }
    double p = 0.0;
    bds_run_outage_probability(run, 28800.0, &p);
    printf("ues=%zu outage@8h=%.3f\n", bds_run_len(run), p);
    bds_run_free(run);
    bds_config_free(cfg);
    return 0;
}
