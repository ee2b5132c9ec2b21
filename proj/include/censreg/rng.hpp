#pragma once

#include <cstdint>
#include <cmath>

namespace censreg {

// Stream derivation and state expansion use splitmix64; the generator core is
// xoshiro256++. Everything (including normal deviates) is built on the raw
// 64-bit output, so sequences are identical across platforms and standard
// libraries. Streams keyed by (seed, stream, purpose) are statistically
// independent, which lets simulation replicates run in any order or thread.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

enum class RngPurpose : std::uint64_t {
    generic = 0,
    candidates = 1,
    replicate_data = 2,
    probe = 3,
};

class StreamRng {
public:
    explicit StreamRng(std::uint64_t seed, std::uint64_t stream = 0,
                       std::uint64_t purpose = 0) {
        std::uint64_t key = seed;
        (void)splitmix64(key);
        key ^= 0xA02BDBF7BB3C0A7ULL * (stream + 1);
        (void)splitmix64(key);
        key ^= 0xD6E8FEB86659FD93ULL * (purpose + 1);
        for (auto& word : state_) word = splitmix64(key);
        // xoshiro256++ requires a nonzero state; splitmix64 output is zero for
        // all four words with probability ~2^-256, but be exact about it.
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
    }

    StreamRng(std::uint64_t seed, std::uint64_t stream, RngPurpose purpose)
        : StreamRng(seed, stream, static_cast<std::uint64_t>(purpose)) {}

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller; the partner deviate is cached.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    static constexpr const char* algorithm() {
        return "splitmix64-keyed xoshiro256++";
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace censreg
