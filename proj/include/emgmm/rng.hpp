#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace emgmm {

/// SplitMix64 finalizer; full-avalanche 64-bit mixing function.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a over a tag string, used to separate RNG purposes.
constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

/// Derive an independent sub-stream seed from (seed, purpose tag, index).
/// Sub-streams never collide for distinct (tag, index) pairs in practice,
/// so parallel replicates and per-component draws stay decorrelated while
/// remaining a pure function of the master seed.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::string_view tag,
                                      std::uint64_t index = 0) {
    std::uint64_t h = mix64(seed ^ hash_tag(tag));
    return mix64(h ^ mix64(index ^ 0x632be59bd9b4e019ULL));
}

/// xoshiro256++ with a fixed SplitMix64 seeding sequence and hand-rolled
/// normal sampling. std::normal_distribution is implementation-defined, so
/// everything here is spelled out to keep runs bit-reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        // Standard recommendation: fill the state from a SplitMix64 stream.
        std::uint64_t x = seed;
        for (auto& si : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }

    std::uint64_t next() {
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

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Marsaglia polar method (no trig, one spare).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    /// Fill out[0..n) with standard normals.
    void normals(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace emgmm
