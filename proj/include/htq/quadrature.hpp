#pragma once

#include <cmath>

namespace htq {

// Numerical integration used by the verification oracles. Kept independent of
// the closed forms it cross-checks.

// ∫_a^∞ f(x) dx via the double-exponential substitution x = a + exp((π/2)·sinh t).
// Handles integrands with polynomial decay of order > 1 (power-law tails).
template <class F>
double integrate_to_infinity(F f, double a, double rel_tol = 1e-12, int max_level = 14) {
    constexpr double half_pi = 1.5707963267948966;
    auto g = [&](double t) {
        double es = std::exp(half_pi * std::sinh(t));
        double v = f(a + es) * es * half_pi * std::cosh(t);
        return std::isfinite(v) ? v : 0.0;
    };
    const double tmax = 4.0;  // x - a spans [exp(-43), exp(43)]
    double h = 1.0;
    double sum = g(0.0);
    for (double t = h; t <= tmax; t += h) sum += g(t) + g(-t);
    double prev = sum * h;
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        double add = 0.0;
        for (double t = h; t <= tmax; t += 2.0 * h) add += g(t) + g(-t);
        sum += add;
        double cur = sum * h;
        if (level >= 3 && std::abs(cur - prev) <= rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

// ∫_a^b f(x) dx, adaptive Simpson.
namespace detail {
template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}
}  // namespace detail

template <class F>
double integrate(F f, double a, double b, double tol = 1e-12, int max_depth = 40) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace htq
