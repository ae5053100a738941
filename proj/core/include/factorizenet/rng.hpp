#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

namespace fznet {

/// Deterministic random source used everywhere randomness is needed.
///
/// Streams are reproducible bit-for-bit across platforms: the engine is
/// std::mt19937 (its output sequence is fully specified by the standard) and
/// every distribution transform is implemented here instead of relying on the
/// implementation-defined std::*_distribution classes. std::shuffle is also
/// unspecified, so shuffling goes through the Fisher-Yates loop below.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : engine_(static_cast<std::uint32_t>(seed ^ (seed >> 32))) {}

    std::uint32_t next_u32() { return engine_(); }

    /// Uniform on [0, 1): top 24 bits scaled by 2^-24 (exact in float).
    float uniform01() {
        return static_cast<float>(engine_() >> 8) * (1.0f / 16777216.0f);
    }

    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01_double() {
        const std::uint64_t hi = engine_() >> 6;   // 26 bits
        const std::uint64_t lo = engine_() >> 5;   // 27 bits
        return static_cast<double>((hi << 27) | lo) * (1.0 / 9007199254740992.0);
    }

    /// Unbiased integer on [0, n), n >= 1. Rejection sampling.
    std::uint32_t uniform_int(std::uint32_t n) {
        const std::uint32_t limit = std::numeric_limits<std::uint32_t>::max() - std::numeric_limits<std::uint32_t>::max() % n;
        std::uint32_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    bool coin_flip() { return (engine_() & 1u) != 0; }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01_double();
        } while (u1 <= 0.0);
        const double u2 = uniform01_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// In-place Fisher-Yates shuffle with a platform-independent draw order.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = uniform_int(static_cast<std::uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// FNV-1a 64-bit hash; used to derive stable per-configuration seeds.
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ull;
    }
    return h;
}

/// splitmix64 finalizer; decorrelates derived seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed for a named sub-stream. Adding new labels never perturbs existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    return mix_seed(master ^ fnv1a64(label));
}

}  // namespace fznet
