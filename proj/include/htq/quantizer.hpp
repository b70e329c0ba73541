#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "htq/codebook.hpp"
#include "htq/common.hpp"
#include "htq/rng.hpp"

namespace htq {

inline double truncate_value(double g, double alpha) {
    if (std::abs(g) <= alpha) return g;
    return std::copysign(alpha, g);
}

// Element-wise clip to [-alpha, alpha]. alpha = +inf is the "no truncation"
// sentinel and acts as the identity.
inline std::vector<double> truncate(std::span<const double> values, double alpha) {
    require(alpha > 0.0, ErrKind::InvalidAlpha, "alpha must be > 0");
    std::vector<double> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(),
                   [alpha](double g) { return truncate_value(g, alpha); });
    return out;
}

// Unbiased stochastic rounding: a value in [l_{k-1}, l_k] maps to index k with
// probability (g - l_{k-1}) / (l_k - l_{k-1}) and to k-1 otherwise. One
// uniform draw per element. Values must already be inside [-alpha, alpha].
inline uint16_t stochastic_quantize_value(double g, const Codebook& cb, Rng& rng) {
    const auto& l = cb.levels;
    require(g >= l.front() && g <= l.back(), ErrKind::OutOfRange,
            "value outside codebook range; truncate first");
    size_t k = std::upper_bound(l.begin(), l.end(), g) - l.begin();
    k = std::clamp<size_t>(k, 1, l.size() - 1);
    double p_r = (g - l[k - 1]) / (l[k] - l[k - 1]);
    double u = rng.u01();
    return static_cast<uint16_t>(u < p_r ? k : k - 1);
}

inline std::vector<uint16_t> stochastic_quantize(std::span<const double> values,
                                                 const Codebook& cb, Rng& rng) {
    std::vector<uint16_t> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = stochastic_quantize_value(values[i], cb, rng);
    return out;
}

inline std::vector<double> dequantize(std::span<const uint16_t> indices, const Codebook& cb) {
    std::vector<double> out(indices.size());
    for (size_t i = 0; i < indices.size(); ++i) {
        require(indices[i] < cb.levels.size(), ErrKind::IndexOutOfRange, "index exceeds level count");
        out[i] = cb.levels[indices[i]];
    }
    return out;
}

inline double empirical_mse(std::span<const double> original, std::span<const double> reconstructed) {
    require(original.size() == reconstructed.size(), ErrKind::LengthMismatch,
            "vectors must have equal length");
    require(!original.empty(), ErrKind::LengthMismatch, "vectors must be non-empty");
    double acc = 0.0;
    for (size_t i = 0; i < original.size(); ++i) {
        double d = original[i] - reconstructed[i];
        acc += d * d;
    }
    return acc / static_cast<double>(original.size());
}

}  // namespace htq
