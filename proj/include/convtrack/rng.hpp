#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace convtrack {

// splitmix64 finalizer; used to spawn decorrelated seeds for sub-streams
// (per-frame background sampling, per-run clustering, ...) from one base seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return mix64(base ^ mix64(stream + 1));
}

// Thin deterministic wrapper around mt19937_64.  The raw engine is specified
// bit-for-bit by the standard, but the std:: distributions are not, so every
// transform we rely on lives here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform double in [0, 1), 53-bit resolution
    double uniform() {
        return double(engine_() >> 11) * 0x1.0p-53;
    }

    // uniform double in (0, 1]; safe as a log() argument
    double uniform_open() {
        return double((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; always burns exactly two engine draws
    // and never caches the second value, so call sequences stay predictable
    double gaussian() {
        double u1 = uniform_open();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
    }

    // unbiased integer in [0, n); rejection sampling on the top bits
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / n * n;
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return std::size_t(x % n);
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace convtrack
