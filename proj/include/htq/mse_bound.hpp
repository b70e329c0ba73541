#pragma once

#include <cmath>

#include "htq/codebook.hpp"
#include "htq/histogram.hpp"

namespace htq {

// Per-element quantization MSE estimates for a codebook against a source
// density: the exact upper bound sum(P_k |Delta_k|^2) / 4 and the high-rate
// estimate with /6 (density locally constant inside each interval).
struct MseBound {
    double quarter = 0.0;
    double sixth = 0.0;
};

inline MseBound mse_bound(const Codebook& cb, const DensityHistogram& density) {
    double inside = density.mass_between(cb.levels.front(), cb.levels.back());
    double total = density.mass_between(density.lo(), density.hi());
    require(total - inside <= 1e-9, ErrKind::SupportMismatch,
            "density has mass outside the codebook range");
    double acc = 0.0;
    for (size_t k = 1; k < cb.levels.size(); ++k) {
        double width = cb.levels[k] - cb.levels[k - 1];
        double p_k = density.mass_between(cb.levels[k - 1], cb.levels[k]);
        acc += p_k * width * width;
    }
    return MseBound{acc / 4.0, acc / 6.0};
}

}  // namespace htq
