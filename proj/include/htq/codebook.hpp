#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "htq/common.hpp"
#include "htq/histogram.hpp"

namespace htq {

// Quantization point layouts over [-alpha, alpha].
enum class DensityKind { Uniform, CubeRoot, BiScaled };

// Declarative description of a quantization-point density lambda_s. The
// codebook realizes it as s+1 ordered levels whose cumulative density hits
// the integers 0..s.
struct DensitySpec {
    DensityKind kind = DensityKind::Uniform;
    double alpha = 1.0;
    int s = 1;  // interval count; s = 2^b - 1 for a b-bit budget

    // CubeRoot: lambda_s ∝ p^{1/3} of this source density.
    DensityHistogram source;

    // BiScaled: s_beta uniform intervals on [-k·alpha, k·alpha], s_alpha/2
    // uniform intervals on each outer band. s_alpha + s_beta == s.
    double k = 0.5;
    int s_alpha = 0;
    int s_beta = 0;
};

struct Codebook {
    std::vector<double> levels;  // ascending, levels.front() = -alpha, levels.back() = alpha
    int bits = 0;                // smallest b with 2^b >= levels.size()

    int s() const { return static_cast<int>(levels.size()) - 1; }
    double alpha() const { return levels.back(); }
};

namespace detail {

inline int bits_for_levels(int s) {
    int b = 1;
    while ((1 << b) < s + 1) ++b;
    return b;
}

}  // namespace detail

inline Codebook make_uniform_codebook(double alpha, int s) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrKind::InvalidAlpha, "alpha must be positive and finite");
    require(s >= 1, ErrKind::BudgetTooSmall, "need at least one interval");
    std::vector<double> levels(static_cast<size_t>(s) + 1);
    // Mirror halves so l_k + l_{s-k} == 0 exactly.
    for (int k = 0; 2 * k <= s; ++k) {
        double l = alpha * (2.0 * k / s - 1.0);
        levels[static_cast<size_t>(k)] = l;
        levels[static_cast<size_t>(s - k)] = -l;
    }
    if (s % 2 == 0) levels[static_cast<size_t>(s / 2)] = 0.0;
    return Codebook{std::move(levels), detail::bits_for_levels(s)};
}

// Levels from numeric inversion of the cumulative of p^{1/3} on the source
// histogram, linear inside bins. A tiny density floor keeps the cumulative
// strictly increasing where the histogram has no support (the solver's alpha
// may exceed the largest observed |g|).
inline Codebook make_cuberoot_codebook(double alpha, int s, const DensityHistogram& source) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrKind::InvalidAlpha, "alpha must be positive and finite");
    require(s >= 1, ErrKind::BudgetTooSmall, "need at least one interval");

    // Piecewise-constant q(x) = p(x)^{1/3} + floor over [-alpha, alpha].
    std::vector<double> brk{-alpha};
    for (double e : source.edges())
        if (e > -alpha && e < alpha) brk.push_back(e);
    brk.push_back(alpha);
    std::sort(brk.begin(), brk.end());

    const size_t segs = brk.size() - 1;
    std::vector<double> q(segs);
    double q_peak = 0.0;
    for (size_t i = 0; i < segs; ++i) {
        double mid = 0.5 * (brk[i] + brk[i + 1]);
        double density = (mid > source.lo() && mid < source.hi())
                             ? source.mass_between(brk[i], brk[i + 1]) / (brk[i + 1] - brk[i])
                             : 0.0;
        q[i] = std::cbrt(density);
        q_peak = std::max(q_peak, q[i]);
    }
    double floor = q_peak > 0 ? 1e-9 * q_peak : 1.0;
    double total = 0.0;
    std::vector<double> cum(segs + 1, 0.0);
    for (size_t i = 0; i < segs; ++i) {
        q[i] += floor;
        total += q[i] * (brk[i + 1] - brk[i]);
        cum[i + 1] = total;
    }

    std::vector<double> levels(static_cast<size_t>(s) + 1);
    levels.front() = -alpha;
    levels.back() = alpha;
    size_t seg = 0;
    for (int k = 1; k < s; ++k) {
        double target = total * k / s;
        while (seg + 1 < segs && cum[seg + 1] < target) ++seg;
        levels[static_cast<size_t>(k)] = brk[seg] + (target - cum[seg]) / q[seg];
    }
    if (source.symmetric()) {
        // enforce exact symmetry against inversion round-off
        for (int k = 0; 2 * k <= s; ++k)
            levels[static_cast<size_t>(s - k)] = -levels[static_cast<size_t>(k)];
        if (s % 2 == 0) levels[static_cast<size_t>(s / 2)] = 0.0;
    }
    for (size_t i = 0; i + 1 < levels.size(); ++i)
        require(levels[i] < levels[i + 1], ErrKind::OutOfRange, "cube-root inversion produced non-increasing levels");
    return Codebook{std::move(levels), detail::bits_for_levels(s)};
}

inline Codebook make_biscaled_codebook(double alpha, double k, int s_alpha, int s_beta) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrKind::InvalidAlpha, "alpha must be positive and finite");
    require(k > 0.0 && k < 1.0, ErrKind::InvalidK, "k must be in (0, 1)");
    require(s_alpha >= 2 && s_beta >= 1, ErrKind::BudgetTooSmall, "need s_alpha >= 2 and s_beta >= 1");
    require(s_alpha % 2 == 0, ErrKind::OddSplit, "s_alpha must be even to split across both outer bands");

    const int s = s_alpha + s_beta;
    const int outer = s_alpha / 2;
    const double beta = k * alpha;
    std::vector<double> levels(static_cast<size_t>(s) + 1);
    for (int j = 0; j <= outer; ++j)
        levels[static_cast<size_t>(j)] = -alpha + (alpha - beta) * j / outer;
    for (int j = 0; j <= s_beta; ++j)
        levels[static_cast<size_t>(outer + j)] = -beta + 2.0 * beta * j / s_beta;
    for (int j = 0; j <= outer; ++j)
        levels[static_cast<size_t>(outer + s_beta + j)] = beta + (alpha - beta) * j / outer;
    // mirror for exact symmetry
    for (int i = 0; 2 * i <= s; ++i) levels[static_cast<size_t>(s - i)] = -levels[static_cast<size_t>(i)];
    if (s % 2 == 0) levels[static_cast<size_t>(s / 2)] = 0.0;
    return Codebook{std::move(levels), detail::bits_for_levels(s)};
}

inline Codebook build_codebook(const DensitySpec& spec) {
    switch (spec.kind) {
        case DensityKind::Uniform:
            return make_uniform_codebook(spec.alpha, spec.s);
        case DensityKind::CubeRoot:
            return make_cuberoot_codebook(spec.alpha, spec.s, spec.source);
        case DensityKind::BiScaled:
            require(spec.s_alpha + spec.s_beta == spec.s, ErrKind::BudgetTooSmall,
                    "biscaled split must sum to s");
            return make_biscaled_codebook(spec.alpha, spec.k, spec.s_alpha, spec.s_beta);
    }
    raise(ErrKind::UsageError, "unknown density kind");
}

}  // namespace htq
