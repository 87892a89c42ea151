#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "rydsim/errors.hpp"

namespace rydsim {

// Deterministic, platform-independent randomness.  A run owns one root seed;
// every consumer (sampling, detection channel, bootstrap, solver restarts, ...)
// draws from its own named sub-stream so adding a consumer never shifts the
// draws seen by another.  Sub-stream seed = splitmix64(root ^ fnv1a64(name)).

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform in [0, 1).  Hand-rolled from the top 53 bits so results do not
    // depend on the standard library's distribution implementation.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n).  Rejection keeps it exactly uniform.
    std::uint64_t index(std::uint64_t n) {
        if (n == 0) throw ValidationError("rng.index: n must be positive");
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Standard exponential via inversion (used for Dirichlet draws).
    double exponential() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(1.0 - u);
    }

private:
    std::mt19937_64 gen_;
};

inline Rng substream(std::uint64_t root_seed, std::string_view name) {
    return Rng(splitmix64(root_seed ^ fnv1a64(name)));
}

}  // namespace rydsim
