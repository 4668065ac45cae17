#include <math.h>
#include <stdio.h>

#include "kspace_forge.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        KfStatus st_ = (call);                                             \
        if (st_ != KF_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)st_,             \
                    kf_last_error_message());                              \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    KfLimits *lim = NULL;
    CHECK(kf_limits_new(1.0, 0.5, KF_NORM_MODE_ROTATION_INVARIANT, &lim));

    double pos[2 * 16];
    for (int i = 0; i < 16; i++) {
        pos[2 * i] = 0.5 * i;
        pos[2 * i + 1] = (i % 2) ? 3.0 : 0.0;
    }
    KfCurve *c = NULL, *p = NULL;
    CHECK(kf_curve_new(2, 1.0, pos, 16, &c));
    KfProjectionOptions opts = kf_projection_options_default();
    KfProjectionDiagnostics diag;
    CHECK(kf_project_curve(c, lim, &opts, &p, &diag));
    KfAdmissibility adm;
    CHECK(kf_check_admissible(p, lim, 1e-6, &adm));
    if (!adm.admissible || !diag.converged) {
        fprintf(stderr, "projection not admissible\n");
        return 1;
    }

    if (kf_limits_new(-1.0, 1.0, KF_NORM_MODE_ROTATION_INVARIANT, &lim) != KF_STATUS_INVALID_LIMITS ||
        kf_last_error_message() == NULL) {
        fprintf(stderr, "expected an invalid-limits status\n");
        return 1;
    }

    double t = 0.0;
    CHECK(kf_segment_time(1.0, lim, &t));
    printf("version %s, %zu iterations, segment %.3f s\n", kf_version(), diag.iterations, t);

    kf_curve_free(p);
    kf_curve_free(c);
    kf_limits_free(lim);
    return fabs(t - 2.0 * sqrt(2.0)) < 1e-12 ? 0 : 1;
}
