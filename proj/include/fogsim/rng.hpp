// Seeded random number generation. All stochastic draws in the simulator go
// through this wrapper so that runs are reproducible for a fixed seed.
#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace fogsim {

// Mixes a value into a well-distributed 64-bit state. Used to derive
// independent stream seeds from a single master seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Quantile function of Exponential(scale = beta), evaluated on a uniform
// draw. Kept as a free function so tests can probe it with exact inputs.
inline double exponential_icdf(double u, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("exponential_icdf: beta must be positive");
    if (u <= 0.0 || u >= 1.0) throw std::invalid_argument("exponential_icdf: u must be in (0,1)");
    return -beta * std::log(u);
}

// mt19937_64 with explicit distribution code. std::*_distribution output is
// implementation-defined, so uniform/exponential are spelled out here to keep
// results identical across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1), never hits either endpoint.
    double uniform_pos() { return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; }

    // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const uint64_t un = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Strictly positive sample from Exponential(scale = beta) milliseconds.
    double exponential_ms(double beta) {
        if (beta <= 0.0) throw std::invalid_argument("exponential_ms: beta must be positive");
        return exponential_icdf(uniform_pos(), beta);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace fogsim
