#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace riskrl {

/// What a random stream is used for. Streams with different purposes never
/// share state, so adding draws to one never shifts another.
enum class StreamPurpose : std::uint64_t {
    Parameters = 1,
    Trial = 2,
    InitialValues = 3,
    Test = 4,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the stream keyed by (master_seed, agent_index, purpose).
inline constexpr std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t agent_index,
                                           StreamPurpose purpose) noexcept {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ agent_index);
    h = splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    return h;
}

/// Per-agent random stream. Uniform draws are computed from raw engine output
/// so results do not depend on the standard library's distribution code.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed = 0) : engine_(seed) {}

    RandomStream(std::uint64_t master_seed, std::uint64_t agent_index, StreamPurpose purpose)
        : engine_(derive_seed(master_seed, agent_index, purpose)) {}

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Gaussian draw via the polar method.
    double normal(double mean, double stddev) {
        if (stddev == 0.0) return mean;
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double k = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * k;
        has_spare_ = true;
        return mean + stddev * u * k;
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace riskrl
