#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace htq {

namespace detail {

inline uint64_t splitmix_finalize(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

// Counter-mode generator. Every stream is addressed by (seed, label, stream
// index) and every draw by a counter, so output never depends on evaluation
// order or thread scheduling. This is the single source of randomness for the
// whole toolkit; seed derivation is documented in the README.
class Rng {
public:
    Rng(uint64_t seed, std::string_view label, uint64_t stream = 0)
        : key_(detail::splitmix_finalize(
              detail::splitmix_finalize(seed ^ detail::fnv1a(label)) ^
              (stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL))) {}

    uint64_t bits_at(uint64_t counter) const {
        return detail::splitmix_finalize(key_ + counter * 0x9e3779b97f4a7c15ULL);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double u01_at(uint64_t counter) const {
        return static_cast<double>(bits_at(counter) >> 11) * 0x1.0p-53;
    }

    uint64_t bits() { return bits_at(counter_++); }
    double u01() { return u01_at(counter_++); }

    // Uniform in (0, 1], safe as a log/pow argument.
    double u01_open() { return 1.0 - u01(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Box-Muller; consumes two counters per call.
    double normal() {
        double u1 = u01_open();
        double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    uint64_t counter() const { return counter_; }
    void set_counter(uint64_t c) { counter_ = c; }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace htq
