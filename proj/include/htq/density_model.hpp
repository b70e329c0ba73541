#pragma once

#include <cmath>

#include "htq/rng.hpp"
#include "htq/tail.hpp"

namespace htq {

// Completion of the fitted tail model into a full symmetric density: the body
// mass 1 - 2·rho is spread uniformly on [-g_min, g_min], the tails follow the
// power law. Integrates to 1; all integrals are closed-form. This is the
// "model" evaluation source for the Q functionals (the alternative being an
// empirical DensityHistogram).
class PowerLawModelDensity {
public:
    explicit PowerLawModelDensity(const PowerLawTail& tail) : t_(tail) { validate_tail(tail); }

    const PowerLawTail& tail() const { return t_; }

    // ∫_lo^hi p, two-sided coordinates.
    double mass_between(double lo, double hi) const {
        if (hi <= lo) return 0.0;
        return cdf(hi) - cdf(lo);
    }

    // ∫_lo^hi p^{1/3}, two-sided coordinates.
    double cuberoot_between(double lo, double hi) const {
        if (hi <= lo) return 0.0;
        return cbrt_cum(hi) - cbrt_cum(lo);
    }

    double pdf(double g) const {
        double a = std::abs(g);
        if (a <= t_.g_min) return body_density();
        return t_.rho * (t_.gamma - 1.0) * std::pow(t_.g_min, t_.gamma - 1.0) * std::pow(a, -t_.gamma);
    }

    double variance() const {
        double body = (1.0 - 2.0 * t_.rho) * t_.g_min * t_.g_min / 3.0;
        double tail = 2.0 * t_.rho * (t_.gamma - 1.0) / (t_.gamma - 3.0) * t_.g_min * t_.g_min;
        return body + tail;
    }

    // Inverse-CDF draw; one uniform per sample.
    double sample(Rng& rng) const {
        double u = rng.u01();
        double sign = u < 0.5 ? -1.0 : 1.0;
        double m = std::abs(2.0 * u - 1.0);  // uniform in [0, 1), magnitude quantile
        double body_mass = 1.0 - 2.0 * t_.rho;
        if (m < body_mass) return sign * t_.g_min * (m / body_mass);
        double q = (m - body_mass) / (2.0 * t_.rho);  // in [0, 1)
        return sign * t_.g_min * std::pow(1.0 - q, -1.0 / (t_.gamma - 1.0));
    }

private:
    double body_density() const { return (1.0 - 2.0 * t_.rho) / (2.0 * t_.g_min); }

    // One-sided mass on [0, x], x >= 0.
    double half_mass(double x) const {
        if (x <= 0.0) return 0.0;
        if (x <= t_.g_min) return body_density() * x;
        double tail = t_.rho * (1.0 - std::pow(t_.g_min / x, t_.gamma - 1.0));
        return 0.5 * (1.0 - 2.0 * t_.rho) + tail;
    }

    double cdf(double x) const { return x >= 0.0 ? 0.5 + half_mass(x) : 0.5 - half_mass(-x); }

    // One-sided ∫_0^x p^{1/3}, x >= 0.
    double half_cbrt(double x) const {
        if (x <= 0.0) return 0.0;
        double body = std::cbrt(body_density()) * std::min(x, t_.g_min);
        if (x <= t_.g_min) return std::cbrt(body_density()) * x;
        double c = std::cbrt(t_.rho * (t_.gamma - 1.0) * std::pow(t_.g_min, t_.gamma - 1.0));
        double e = 1.0 - t_.gamma / 3.0;  // < 0 for gamma > 3
        double tail = c * (std::pow(x, e) - std::pow(t_.g_min, e)) / e;
        return body + tail;
    }

    double cbrt_cum(double x) const {
        return x >= 0.0 ? half_cbrt(x) : -half_cbrt(-x);
    }

    PowerLawTail t_;
};

}  // namespace htq
