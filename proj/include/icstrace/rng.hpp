#pragma once

#include <cstdint>
#include <random>

namespace icstrace {

// Deterministic RNG wrapper. mt19937_64 output is fixed by the standard, and
// the bounded/unit helpers below avoid std::*_distribution, whose results
// differ between library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t bounded(std::uint64_t n) { return next() % n; }

    // Uniform integer in [lo, hi] inclusive.
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
        return lo + bounded(hi - lo + 1);
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

} // namespace icstrace
