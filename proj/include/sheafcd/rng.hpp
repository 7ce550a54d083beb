#pragma once

#include <cmath>
#include <cstdint>

namespace sheafcd {

/**
 * Small counter-free PRNG (splitmix64). Used everywhere instead of the
 * standard-library engines so that streams are reproducible bit-for-bit
 * across platforms and standard-library versions.
 */
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (no cached second value).
    double gaussian() {
        // u1 in (0, 1] so the log stays finite.
        double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

/**
 * Counter-based seed for run (point_index, run_index) of a sweep keyed by
 * master_seed. Independent of execution order, so concurrent runs are
 * reproducible.
 */
inline std::uint64_t derive_seed(std::uint64_t master_seed,
                                 std::uint64_t point_index,
                                 std::uint64_t run_index) {
    std::uint64_t h = detail::mix64(master_seed + 0x9E3779B97F4A7C15ULL);
    h = detail::mix64(h ^ (point_index + 0xD1B54A32D192ED03ULL));
    h = detail::mix64(h ^ (run_index + 0x8CB92BA72F3D8DD7ULL));
    return h;
}

} // namespace sheafcd
