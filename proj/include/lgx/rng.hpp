#pragma once

#include <cmath>
#include <cstdint>

namespace lgx {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combine a seed with stream identifiers into an independent stream seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256** with explicit state; all draws are reproducible across
/// platforms (no dependence on std distribution implementations).
class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& s : state_) s = splitmix64(sm);
        gauss_cached_ = false;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (gauss_cached_) {
            gauss_cached_ = false;
            return gauss_cache_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        gauss_cache_ = r * std::sin(2.0 * M_PI * u2);
        gauss_cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] = {};
    double gauss_cache_ = 0.0;
    bool gauss_cached_ = false;
};

}  // namespace lgx
