#pragma once

#include <algorithm>
#include <cmath>

#include "htq/common.hpp"
#include "htq/density_model.hpp"
#include "htq/histogram.hpp"

namespace htq {

// In-range mass functionals of a symmetric density. They determine the
// optimal truncation threshold for the three quantizer layouts. A Density is
// anything exposing mass_between(lo, hi) and cuberoot_between(lo, hi);
// DensityHistogram (empirical) and PowerLawModelDensity (fitted model) both
// qualify.

// Q_U(alpha) = ∫_{-alpha}^{alpha} p
template <class Density>
double q_u(double alpha, const Density& p) {
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    return std::min(1.0, p.mass_between(-alpha, alpha));
}

// Q_N(alpha) = [ ∫_{-alpha}^{alpha} p^{1/3} (1/2alpha)^{2/3} ]^3
//            = (∫ p^{1/3})^3 / (2alpha)^2
template <class Density>
double q_n(double alpha, const Density& p) {
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    double i = p.cuberoot_between(-alpha, alpha);
    return i * i * i / (4.0 * alpha * alpha);
}

// Q_B(alpha, k) = [ (2∫_{k·alpha}^{alpha} p)^{1/3} (1-k)^{2/3}
//                 + (2∫_0^{k·alpha} p)^{1/3} k^{2/3} ]^3
template <class Density>
double q_b(double alpha, double k, const Density& p) {
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    require(k > 0.0 && k < 1.0, ErrKind::InvalidK, "k must be in (0, 1)");
    double inner2 = p.mass_between(-k * alpha, k * alpha);          // 2·∫_0^{k·alpha} p
    double outer2 = p.mass_between(-alpha, alpha) - inner2;         // 2·∫_{k·alpha}^{alpha} p
    outer2 = std::max(outer2, 0.0);
    double root = std::cbrt(outer2) * std::pow(1.0 - k, 2.0 / 3.0) +
                  std::cbrt(inner2) * std::pow(k, 2.0 / 3.0);
    return root * root * root;
}

inline constexpr double kBiscaledKStep = 0.01;

// argmin over the dense grid k in {0.01, 0.02, ..., 0.99}.
template <class Density>
double minimize_q_b(double alpha, const Density& p, double* q_min_out = nullptr) {
    double best_k = 0.5;
    double best_q = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= 99; ++i) {
        double k = i * kBiscaledKStep;
        double q = q_b(alpha, k, p);
        if (q < best_q) {
            best_q = q;
            best_k = k;
        }
    }
    if (q_min_out) *q_min_out = best_q;
    return best_k;
}

// Level-budget split between the inner and outer bands, from the average
// densities p1 (inner, |g| < k·alpha) and p2 (outer):
//   s_alpha = p2^{1/3}(1-k) / (p2^{1/3}(1-k) + p1^{1/3}k) · s
// The integer split keeps s_alpha even (the outer band is two symmetric
// halves) and preserves s_alpha + s_beta == s.
struct BiscaledSplit {
    double s_alpha_real = 0.0;
    double s_beta_real = 0.0;
    int s_alpha = 0;
    int s_beta = 0;
};

inline BiscaledSplit split_levels_biscaled(int s, double k, double p1_bar, double p2_bar) {
    require(s >= 3, ErrKind::BudgetTooSmall, "biscaled split needs s >= 3");
    require(k > 0.0 && k < 1.0, ErrKind::InvalidK, "k must be in (0, 1)");
    require(p1_bar >= 0.0 && p2_bar >= 0.0 && p1_bar + p2_bar > 0.0, ErrKind::OutOfRange,
            "average densities must be non-negative and not both zero");
    double wa = std::cbrt(p2_bar) * (1.0 - k);
    double wb = std::cbrt(p1_bar) * k;
    BiscaledSplit split;
    split.s_alpha_real = wa / (wa + wb) * s;
    split.s_beta_real = wb / (wa + wb) * s;
    int s_alpha = static_cast<int>(std::llround(split.s_alpha_real / 2.0)) * 2;
    s_alpha = std::clamp(s_alpha, 2, s % 2 == 0 ? s - 2 : s - 1);
    split.s_alpha = s_alpha;
    split.s_beta = s - s_alpha;
    return split;
}

template <class Density>
BiscaledSplit split_levels_biscaled(int s, double k, double alpha, const Density& p) {
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    require(k > 0.0 && k < 1.0, ErrKind::InvalidK, "k must be in (0, 1)");
    double inner = 0.5 * p.mass_between(-k * alpha, k * alpha);
    double outer = 0.5 * (p.mass_between(-alpha, alpha) - p.mass_between(-k * alpha, k * alpha));
    double p1_bar = inner / (k * alpha);
    double p2_bar = std::max(outer, 0.0) / ((1.0 - k) * alpha);
    return split_levels_biscaled(s, k, p1_bar, p2_bar);
}

}  // namespace htq
