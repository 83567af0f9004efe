#pragma once
// Deterministic keyed RNG used everywhere randomness is needed.
//
// All streams are derived from explicit integer keys (master seed, case id,
// scene index, tx, rx, ...) via splitmix64, so any value in the pipeline can
// be regenerated in isolation and datasets are bit-reproducible regardless of
// generation order or thread count.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace mapfix {

constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Collapse a list of keys into one 64-bit stream seed. Each key is absorbed
// and then fully mixed, so sibling tuples ({s,1,4} vs {s,2,3}, ...) land in
// unrelated streams instead of adjacent ones.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = 0x8AD8257E5A14B1F5ull;
    for (std::uint64_t k : keys) {
        s ^= k;
        s = splitmix64_next(s);
    }
    return s;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t u64() { return splitmix64_next(state_); }

    // Uniform in [lo, hi) with 53-bit mantissa resolution.
    double uniform(double lo = 0.0, double hi = 1.0) {
        const double u = static_cast<double>(u64() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    // Standard normal via Box-Muller (one deviate per call, fixed algorithm
    // so streams are portable across platforms).
    double gauss() {
        double u1 = uniform();
        if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

  private:
    std::uint64_t state_;
};

}  // namespace mapfix
