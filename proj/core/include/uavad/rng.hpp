#pragma once

#include <cstdint>
#include <random>

namespace uavad {

// Deterministic, platform-portable random source.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The std::*_distribution adaptors are NOT portable across
// standard libraries, so uniform and Gaussian variates are derived here
// explicitly: uniforms take the top 53 bits of the engine output, Gaussians
// come from the basic Box-Muller transform (one cached spare per pair).
// Identical seeds therefore produce identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Unbiased integer in [0, n). n must be > 0.
    std::uint64_t uniform_below(std::uint64_t n);

    double gaussian(double mean = 0.0, double stddev = 1.0);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Combines two seeds into one via splitmix64 finalization. Used to give
// each flight/channel its own independent and reproducible stream.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace uavad
