#pragma once

#include <cstdint>
#include <random>

namespace crowdval {

// One stream per campaign/scenario. All stochastic draws go through it.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

// Uniform draw on [0, 1).
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>{0.0, 1.0}(rng);
}

}  // namespace crowdval
