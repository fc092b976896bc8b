// Walks through the fourth-order modal example: dense balanced truncation
// keeps the two dominant Hankel singular values, while balancing two
// excellent rank-3 Gramian approximations does not.
#include <cstdio>

#include "tanbal/tanbal.hpp"

int main() {
    using namespace tanbal;
    const StateSpaceModel model = illustrative4();
    const GramianPair g = gramians_dense(model);

    const Vector hsv = hankel_singular_values(g).values;
    std::printf("Hankel singular values:");
    for (Index i = 0; i < hsv.size(); ++i) std::printf(" %.4f", hsv(i));
    std::printf("\n");

    const ReducedModel bt = bt_square_root(model, g, 2);
    std::printf("dense BT, r = 2 retains: %.4f %.4f\n", bt.retained_sv->values(0), bt.retained_sv->values(1));

    const Matrix lp = psd_factor(g.p).z.leftCols(3);
    const Matrix lq = psd_factor(g.q).z.leftCols(3);
    std::printf("rank-3 Gramian errors: P %.4e, Q %.4e\n",
                symmetric_norm2(g.p - lp * lp.transpose()) / symmetric_norm2(g.p),
                symmetric_norm2(g.q - lq * lq.transpose()) / symmetric_norm2(g.q));
    const ReducedModel naive = bt_from_factors(model, lp, lq, 2);
    const Vector naive_hsv = hankel_singular_values(naive.rom).values;
    std::printf("balancing the rank-3 factors gives ROM HSVs: %.4f %.4f\n", naive_hsv(0), naive_hsv(1));

    AtiaConfig cfg;
    cfg.r0 = 1;
    cfg.dr = 1;
    cfg.tol = 1e-3;
    const AtiaResult atia = atia_bt(model, cfg);
    std::printf("ATIA-BT stopped at order %ld after %ld iterations; estimates:", static_cast<long>(atia.rom.order()),
                static_cast<long>(atia.iterations_used));
    for (Index i = 0; i < atia.hankel_estimates.values.size(); ++i) std::printf(" %.4f", atia.hankel_estimates.values(i));
    std::printf("\n");
    return 0;
}
