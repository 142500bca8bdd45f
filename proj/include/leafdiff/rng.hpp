#pragma once

#include <cmath>
#include <cstdint>

namespace leafdiff {

// Counter-based noise: every draw is a pure function of (seed, index), so
// replaying any window of a stream is bitwise identical and independent of
// worker count.

inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return mix64(master ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

// uniform in (0,1]; never returns 0 so log() is safe
inline double uniform01(uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

struct GaussianPair {
    double g1, g2;
};

struct NoiseStream {
    uint64_t seed = 0;

    // standard normal pair at counter `index` (Box-Muller)
    GaussianPair gaussians(uint64_t index) const {
        uint64_t h1 = mix64(seed ^ mix64(index));
        uint64_t h2 = mix64(h1 ^ 0xd1342543de82ef95ULL);
        double u1 = uniform01(h1);
        double u2 = (static_cast<double>(h2 >> 11)) * 0x1.0p-53; // [0,1)
        double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(6.283185307179586476925286766559 * u2),
                r * std::sin(6.283185307179586476925286766559 * u2)};
    }

    double uniform(uint64_t index) const {
        return uniform01(mix64(seed ^ mix64(index ^ 0xa0761d6478bd642fULL)));
    }
};

// R2 low-discrepancy sequence (plastic constant), for audit grids and
// quasi-random initial states.
inline void r2_point(uint64_t i, double& x, double& y) {
    constexpr double a1 = 0.7548776662466927; // 1/phi_2
    constexpr double a2 = 0.5698402909980532; // 1/phi_2^2
    double u = 0.5 + a1 * static_cast<double>(i + 1);
    double v = 0.5 + a2 * static_cast<double>(i + 1);
    x = u - std::floor(u);
    y = v - std::floor(v);
}

} // namespace leafdiff
