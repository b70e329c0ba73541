#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "htq/common.hpp"
#include "htq/rng.hpp"

namespace htq {

// A batch of observed gradient values, tagged with the parameter group they
// came from. Values must be finite.
struct GradientSample {
    std::vector<double> values;
    std::string group_id = "all";
};

// Piecewise-constant probability density on [edges.front(), edges.back()].
// `mass[i]` is the probability of bin [edges[i], edges[i+1]); masses sum to 1.
class DensityHistogram {
public:
    DensityHistogram() = default;

    DensityHistogram(std::vector<double> edges, std::vector<double> mass, bool symmetric = false)
        : edges_(std::move(edges)), mass_(std::move(mass)), symmetric_(symmetric) {
        require(edges_.size() == mass_.size() + 1 && mass_.size() >= 1, ErrKind::LengthMismatch,
                "histogram needs edges.size() == mass.size() + 1");
        for (size_t i = 0; i + 1 < edges_.size(); ++i)
            require(edges_[i] < edges_[i + 1], ErrKind::OutOfRange, "edges must be strictly increasing");
        double total = 0.0;
        for (double m : mass_) {
            require(m >= 0.0, ErrKind::OutOfRange, "bin mass must be >= 0");
            total += m;
        }
        require(std::abs(total - 1.0) <= 1e-9, ErrKind::OutOfRange, "bin masses must sum to 1");
        rebuild_cumulative();
    }

    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& mass() const { return mass_; }
    bool symmetric() const { return symmetric_; }
    size_t bins() const { return mass_.size(); }
    double lo() const { return edges_.front(); }
    double hi() const { return edges_.back(); }

    double bin_width(size_t i) const { return edges_[i + 1] - edges_[i]; }
    double bin_density(size_t i) const { return mass_[i] / bin_width(i); }

    // ∫_lo^hi p(x) dx, clipping [lo, hi] against the support.
    double mass_between(double lo, double hi) const {
        return accumulate(lo, hi, [](double density, double len) { return density * len; });
    }

    // ∫_lo^hi p(x)^{1/3} dx over the support overlap. Regions outside the
    // support contribute zero.
    double cuberoot_between(double lo, double hi) const {
        return accumulate(lo, hi, [](double density, double len) { return std::cbrt(density) * len; });
    }

    // Inverse-CDF draw: pick a bin by mass, then a uniform point inside it.
    double sample(Rng& rng) const {
        double u = rng.u01() * cum_.back();
        size_t i = std::upper_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        if (i >= mass_.size()) i = mass_.size() - 1;
        double base = i == 0 ? 0.0 : cum_[i - 1];
        double frac = mass_[i] > 0 ? (u - base) / mass_[i] : 0.5;
        return edges_[i] + frac * bin_width(i);
    }

private:
    template <class Fn>
    double accumulate(double lo, double hi, Fn per_bin) const {
        if (hi <= lo) return 0.0;
        double total = 0.0;
        for (size_t i = 0; i < mass_.size(); ++i) {
            double a = std::max(lo, edges_[i]);
            double b = std::min(hi, edges_[i + 1]);
            if (b > a) total += per_bin(bin_density(i), b - a);
        }
        return total;
    }

    void rebuild_cumulative() {
        cum_.resize(mass_.size());
        double acc = 0.0;
        for (size_t i = 0; i < mass_.size(); ++i) {
            acc += mass_[i];
            cum_[i] = acc;
        }
    }

    std::vector<double> edges_;
    std::vector<double> mass_;
    std::vector<double> cum_;
    bool symmetric_ = false;
};

// Equal-width histogram over [-max|v|, max|v|]. With `symmetrize` the
// histogram of |v| is mirrored about zero, so mass(+x) == mass(-x) exactly.
inline DensityHistogram empirical_density(std::span<const double> values, int bins,
                                          bool symmetrize) {
    require(bins >= 2, ErrKind::OutOfRange, "need at least 2 bins");
    require(!values.empty(), ErrKind::DegenerateSamples, "no samples");
    double span = 0.0;
    for (double v : values) span = std::max(span, std::abs(v));
    if (span == 0.0) span = 1.0;

    if (bins % 2 != 0) ++bins;
    const size_t n = values.size();
    std::vector<double> mass(static_cast<size_t>(bins), 0.0);
    const int half = bins / 2;

    if (symmetrize) {
        const double w = span / half;
        std::vector<double> half_mass(static_cast<size_t>(half), 0.0);
        for (double v : values) {
            int i = std::min(static_cast<int>(std::abs(v) / w), half - 1);
            half_mass[static_cast<size_t>(i)] += 1.0;
        }
        for (int i = 0; i < half; ++i) {
            double m = half_mass[static_cast<size_t>(i)] / (2.0 * static_cast<double>(n));
            mass[static_cast<size_t>(half + i)] = m;
            mass[static_cast<size_t>(half - 1 - i)] = m;
        }
    } else {
        const double w = 2.0 * span / bins;
        for (double v : values) {
            int i = std::min(static_cast<int>((v + span) / w), bins - 1);
            if (i < 0) i = 0;
            mass[static_cast<size_t>(i)] += 1.0 / static_cast<double>(n);
        }
    }

    std::vector<double> edges(static_cast<size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        edges[static_cast<size_t>(i)] = -span + 2.0 * span * i / bins;
    edges.front() = -span;
    edges.back() = span;

    // Symmetrized masses are exact by construction; re-normalize the direct
    // path against accumulated rounding.
    double total = 0.0;
    for (double m : mass) total += m;
    if (total > 0 && std::abs(total - 1.0) > 1e-15)
        for (double& m : mass) m /= total;

    return DensityHistogram(std::move(edges), std::move(mass), symmetrize);
}

inline DensityHistogram empirical_density(const GradientSample& sample, int bins, bool symmetrize) {
    return empirical_density(std::span<const double>(sample.values), bins, symmetrize);
}

}  // namespace htq
