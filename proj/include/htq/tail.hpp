#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "htq/common.hpp"
#include "htq/histogram.hpp"

namespace htq {

// Power-law tail model: p(g) = rho·(gamma-1)·g_min^{gamma-1}·|g|^{-gamma} for
// |g| > g_min, where rho is the one-sided tail mass. The solver formulas need
// gamma in (3, 5]; gamma <= 3 makes the truncation-bias integral diverge.
struct PowerLawTail {
    double gamma = 4.0;
    double g_min = 1.0;
    double rho = 0.5;
};

inline constexpr double kGammaMin = 3.001;  // rejection threshold for (gamma-3) denominators
inline constexpr double kGammaClampLo = 3.01;
inline constexpr double kGammaClampHi = 5.0;

inline void validate_tail(const PowerLawTail& t) {
    require(t.g_min > 0.0, ErrKind::InvalidGmin, "g_min must be > 0");
    require(t.rho >= 0.0 && t.rho <= 0.5, ErrKind::OutOfRange, "rho must be in [0, 0.5]");
    require(t.gamma > kGammaMin && t.gamma <= kGammaClampHi, ErrKind::GammaOutOfRange,
            "gamma must be in (3, 5]");
}

// Model density at a tail point. Only defined for |g| > g_min.
inline double powerlaw_pdf(double g, const PowerLawTail& t) {
    require(t.g_min > 0.0, ErrKind::InvalidGmin, "g_min must be > 0");
    double a = std::abs(g);
    require(a > t.g_min, ErrKind::OutOfSupport, "pdf only defined for |g| > g_min");
    return t.rho * (t.gamma - 1.0) * std::pow(t.g_min, t.gamma - 1.0) * std::pow(a, -t.gamma);
}

// Hill-style MLE over the values with |g| > g_min:
//   gamma = 1 + n / sum(ln(|g_j| / g_min)).
inline double fit_gamma_mle(std::span<const double> values, double g_min) {
    require(g_min > 0.0, ErrKind::InvalidGmin, "g_min must be > 0");
    double log_sum = 0.0;
    size_t n = 0;
    for (double v : values) {
        double a = std::abs(v);
        if (a > g_min) {
            log_sum += std::log(a / g_min);
            ++n;
        }
    }
    require(n > 0, ErrKind::NoTailSamples, "no samples above g_min");
    return 1.0 + static_cast<double>(n) / log_sum;
}

inline double fit_gamma_mle(const GradientSample& s, double g_min) {
    return fit_gamma_mle(std::span<const double>(s.values), g_min);
}

// Nearest-rank quantile of |values| (1-indexed rank ceil(q·n)).
inline double select_gmin(std::span<const double> values, double quantile) {
    require(!values.empty(), ErrKind::DegenerateSamples, "no samples");
    require(quantile > 0.0 && quantile < 1.0, ErrKind::OutOfRange, "quantile must be in (0, 1)");
    std::vector<double> abs_vals(values.size());
    std::transform(values.begin(), values.end(), abs_vals.begin(),
                   [](double v) { return std::abs(v); });
    size_t rank = static_cast<size_t>(std::ceil(quantile * static_cast<double>(abs_vals.size())));
    rank = std::clamp<size_t>(rank, 1, abs_vals.size());
    std::nth_element(abs_vals.begin(), abs_vals.begin() + (rank - 1), abs_vals.end());
    double g = abs_vals[rank - 1];
    require(g > 0.0, ErrKind::DegenerateSamples, "quantile of |values| is 0");
    return g;
}

inline double select_gmin(const GradientSample& s, double quantile) {
    return select_gmin(std::span<const double>(s.values), quantile);
}

// One-sided tail mass under the symmetry assumption:
//   rho = #{ |g_j| > g_min } / (2n).
inline double estimate_rho(std::span<const double> values, double g_min) {
    require(g_min > 0.0, ErrKind::InvalidGmin, "g_min must be > 0");
    require(!values.empty(), ErrKind::DegenerateSamples, "no samples");
    size_t n_tail = 0;
    for (double v : values)
        if (std::abs(v) > g_min) ++n_tail;
    return static_cast<double>(n_tail) / (2.0 * static_cast<double>(values.size()));
}

inline double estimate_rho(const GradientSample& s, double g_min) {
    return estimate_rho(std::span<const double>(s.values), g_min);
}

struct TailFitReport {
    PowerLawTail tail;
    size_t n_tail = 0;
    bool gamma_clamped = false;
    double gamma_raw = 0.0;
};

// Full pipeline: g_min from the nearest-rank quantile, gamma by MLE (clamped
// into [3.01, 5] with a warning flag), rho from the exceedance count.
inline TailFitReport fit_tail(std::span<const double> values, double gmin_quantile = 0.90) {
    TailFitReport report;
    report.tail.g_min = select_gmin(values, gmin_quantile);
    report.gamma_raw = fit_gamma_mle(values, report.tail.g_min);
    report.tail.gamma = std::clamp(report.gamma_raw, kGammaClampLo, kGammaClampHi);
    report.gamma_clamped = report.tail.gamma != report.gamma_raw;
    report.tail.rho = estimate_rho(values, report.tail.g_min);
    for (double v : values)
        if (std::abs(v) > report.tail.g_min) ++report.n_tail;
    return report;
}

}  // namespace htq
