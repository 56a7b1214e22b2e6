#include <math.h>
#include <stdio.h>
#include <string.h>

#include "equinet.h"

#define CHECK(call)                                                           \
    do {                                                                      \
        EqStatus s_ = (call);                                                 \
        if (s_ != EQ_STATUS_OK) {                                             \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, eq_last_error()); \
            return 1;                                                         \
        }                                                                     \
    } while (0)

int main(void) {
    printf("version %s\n", eq_version());

    /* z sampled on a 5x5 grid; the dz stencil returns 1 everywhere. */
    double re[25], im[25];
    for (int kx = -2; kx <= 2; kx++)
        for (int ky = -2; ky <= 2; ky++) {
            re[(kx + 2) * 5 + ky + 2] = 0.5 * kx;
            im[(kx + 2) * 5 + ky + 2] = 0.5 * ky;
        }
    EqSignal *z = NULL, *dz = NULL;
    CHECK(eq_signal_new(0.5, 2, 1, re, im, 25, &z));
    CHECK(eq_stencil_apply(EQ_STENCIL_DZ, z, &dz));
    double sp;
    size_t hw, ch, len;
    CHECK(eq_signal_shape(dz, &sp, &hw, &ch, &len));
    if (hw != 1 || len != 9) return 2;
    double ore[9], oim[9];
    CHECK(eq_signal_values(dz, ore, oim, 9));
    for (int k = 0; k < 9; k++)
        if (fabs(ore[k] - 1.0) > 1e-12 || fabs(oim[k]) > 1e-12) return 3;

    EqKernelGap g;
    CHECK(eq_kernel_gap(0, 0, 1.0, &g));
    if (!(g.gap > 0.0) || g.mass_error > 1e-8) return 4;

    EqChargeNet *net = NULL;
    CHECK(eq_charge_net_random(1.0, 1.0, 1, 2, 2, 1, 1, 7, &net));
    size_t in_hw;
    CHECK(eq_charge_net_input_half_width(net, &in_hw));
    size_t n_in = (2 * in_hw + 1) * (2 * in_hw + 1);
    double buf[1024];
    if (n_in > 1024) return 5;
    for (size_t k = 0; k < n_in; k++) buf[k] = sin((double)k);
    EqSignal *x = NULL, *y = NULL;
    CHECK(eq_signal_new(1.0, in_hw, 1, buf, NULL, n_in, &x));
    CHECK(eq_charge_net_forward(net, x, &y));

    if (eq_charge_net_from_json("{\"lambda\":1}", &net) == EQ_STATUS_OK) return 6;
    if (strlen(eq_last_error()) == 0) return 7;

    double ys[3] = {1.0, 2.0, 3.0}, p[3];
    CHECK(eq_power_sums(ys, 3, p));
    if (p[0] != 6.0 || p[1] != 14.0 || p[2] != 36.0) return 8;

    eq_signal_free(y);
    eq_signal_free(x);
    eq_charge_net_free(net);
    eq_signal_free(dz);
    eq_signal_free(z);
    printf("ok\n");
    return 0;
}
