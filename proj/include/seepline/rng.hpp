#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace seepline {

/// Deterministic random stream. The engine is std::mt19937_64, whose raw
/// output sequence is fixed by the standard; all value conversions are done
/// here rather than through std distributions, so draws are bit-identical
/// across platforms and compiler versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

    /// Independent stream derived from a global seed and a stage name,
    /// e.g. substream(seed, "synth") or substream(seed, "tree", 17).
    static Rng substream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
        std::uint64_t h = fnv1a(name);
        h ^= mix(seed + 0x9e3779b97f4a7c15ULL);
        h ^= mix(index + 0x2545f4914f6cdd1dULL);
        return Rng(h);
    }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), rejection-sampled (n > 0).
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    /// Standard normal via Box-Muller; the spare deviate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    // SplitMix64 finalizer; spreads low-entropy seeds over the full state space.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace seepline
