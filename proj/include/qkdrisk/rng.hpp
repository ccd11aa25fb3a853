#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace qkdrisk {

// Deterministic RNG used everywhere seeds appear in the public API.
// The variate transforms are spelled out (instead of std::*_distribution)
// so that identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double u01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // Box-Muller, cosine branch only.
    double normal(double mu, double sigma) {
        double u1 = u01();
        double u2 = u01();
        // keep log argument strictly positive
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return mu + sigma * r * std::cos(2.0 * 3.141592653589793238462643383279503 * u2);
    }

    double exponential(double mean) { return -mean * std::log1p(-u01()); }

private:
    std::mt19937_64 eng_;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Splittable seed scheme: every (stage, fold, c, trial, ...) coordinate is
// folded into the master seed through SplitMix64, so serial and parallel
// execution orders see the same per-task generators.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = detail::splitmix64(master);
    for (std::uint64_t p : path) {
        h = detail::splitmix64(h ^ detail::splitmix64(p));
    }
    return h;
}

}  // namespace qkdrisk
